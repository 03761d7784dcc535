"""Spectral laboratory for the Robin-type Bilaplacian on intervals, rectangles and disks."""
from .model import BoundaryRegime, Disk, ExtReal, Interval, ParamSet, Rectangle, Spectrum

__version__ = "0.1.0"

__all__ = ["BoundaryRegime", "Disk", "ExtReal", "Interval", "ParamSet", "Rectangle", "Spectrum", "__version__"]
