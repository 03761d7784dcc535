"""Shared value types: parameters, boundary regimes, model domains, result records."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import DegenerateDomain, SigmaOutOfRange


@dataclass(frozen=True)
class ExtReal:
    """A real number or +infinity, stored as a tag rather than a float sentinel."""

    value: float = 0.0
    infinite: bool = False

    @classmethod
    def inf(cls) -> "ExtReal":
        return cls(0.0, True)

    @classmethod
    def coerce(cls, x: Union["ExtReal", float, int, str]) -> "ExtReal":
        if isinstance(x, ExtReal):
            return x
        if isinstance(x, str):
            if x.strip().lower() in ("inf", "+inf", "infinity", "+infinity"):
                return cls.inf()
            x = float(x)
        x = float(x)
        if math.isnan(x) or x == -math.inf:
            raise ValueError(f"extended parameter must be finite or +inf, got {x}")
        if x == math.inf:
            return cls.inf()
        return cls(x, False)

    @property
    def is_finite(self) -> bool:
        return not self.infinite

    def finite_or(self, default: float) -> float:
        """The finite value, or ``default`` in place of +inf (the 0 * inf = 0 convention uses 0)."""
        return default if self.infinite else self.value

    def __float__(self) -> float:
        return math.inf if self.infinite else self.value

    def to_json(self) -> Union[float, str]:
        return "inf" if self.infinite else self.value

    def __str__(self) -> str:
        return "+inf" if self.infinite else repr(self.value)


class BoundaryRegime(enum.Enum):
    FULL_ROBIN = "FullRobin"
    NAVIER_ROBIN = "NavierRobin"
    KUTTLER_SIGILLITO = "KuttlerSigillito"
    DIRICHLET = "Dirichlet"

    @property
    def clamps_value(self) -> bool:
        return self in (BoundaryRegime.NAVIER_ROBIN, BoundaryRegime.DIRICHLET)

    @property
    def clamps_normal(self) -> bool:
        return self in (BoundaryRegime.KUTTLER_SIGILLITO, BoundaryRegime.DIRICHLET)


@dataclass(frozen=True)
class ParamSet:
    """Poisson ratio, tension and the two Robin parameters (beta, gamma may be +inf)."""

    sigma: float = 0.0
    alpha: float = 0.0
    beta: ExtReal = field(default_factory=ExtReal)
    gamma: ExtReal = field(default_factory=ExtReal)

    def __post_init__(self):
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", ExtReal.coerce(self.beta))
        object.__setattr__(self, "gamma", ExtReal.coerce(self.gamma))
        if not (math.isfinite(self.sigma) and math.isfinite(self.alpha)):
            raise ValueError("sigma and alpha must be finite")

    def replace(self, **changes) -> "ParamSet":
        d = dict(sigma=self.sigma, alpha=self.alpha, beta=self.beta, gamma=self.gamma)
        d.update(changes)
        return ParamSet(**d)

    @property
    def regime(self) -> BoundaryRegime:
        return regime_of(self)

    def to_json(self) -> dict:
        return {
            "sigma": self.sigma,
            "alpha": self.alpha,
            "beta": self.beta.to_json(),
            "gamma": self.gamma.to_json(),
        }

    @classmethod
    def from_json(cls, d: Mapping[str, Any]) -> "ParamSet":
        return cls(
            sigma=d.get("sigma", 0.0),
            alpha=d.get("alpha", 0.0),
            beta=d.get("beta", 0.0),
            gamma=d.get("gamma", 0.0),
        )


def regime_of(params: ParamSet) -> BoundaryRegime:
    b_inf, g_inf = params.beta.infinite, params.gamma.infinite
    if b_inf and g_inf:
        return BoundaryRegime.DIRICHLET
    if g_inf:
        return BoundaryRegime.NAVIER_ROBIN
    if b_inf:
        return BoundaryRegime.KUTTLER_SIGILLITO
    return BoundaryRegime.FULL_ROBIN


@dataclass(frozen=True)
class Interval:
    a: float = 0.0
    b: float = 1.0

    dim = 1

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def volume(self) -> float:
        return self.b - self.a

    @property
    def boundary_measure(self) -> float:
        return 2.0  # counting measure on the two endpoints

    def to_json(self) -> dict:
        return {"kind": "interval", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Rectangle:
    Lx: float = 1.0
    Ly: float = 1.0

    dim = 2

    @property
    def volume(self) -> float:
        return self.Lx * self.Ly

    @property
    def boundary_measure(self) -> float:
        return 2.0 * (self.Lx + self.Ly)

    def to_json(self) -> dict:
        return {"kind": "rectangle", "Lx": self.Lx, "Ly": self.Ly}


@dataclass(frozen=True)
class Disk:
    R: float = 1.0

    dim = 2

    @property
    def volume(self) -> float:
        return math.pi * self.R ** 2

    @property
    def boundary_measure(self) -> float:
        return 2.0 * math.pi * self.R

    @property
    def curvature(self) -> float:
        """Mean curvature of the boundary circle (divergence of the outer normal)."""
        return 1.0 / self.R

    def to_json(self) -> dict:
        return {"kind": "disk", "R": self.R}


DomainSpec = Union[Interval, Rectangle, Disk]


def domain_from_json(d: Mapping[str, Any]) -> DomainSpec:
    kind = d.get("kind")
    if kind == "interval":
        return Interval(float(d.get("a", 0.0)), float(d.get("b", 1.0)))
    if kind == "rectangle":
        return Rectangle(float(d.get("Lx", 1.0)), float(d.get("Ly", 1.0)))
    if kind == "disk":
        return Disk(float(d.get("R", 1.0)))
    raise ValueError(f"unknown domain kind {kind!r}")


def sigma_range(domain: DomainSpec) -> tuple:
    # in 1-D the Hessian energy does not see sigma; keep a single admissible window
    if domain.dim == 1:
        return (-1.0, 1.0)
    return (-1.0 / (domain.dim - 1), 1.0)


def validate(domain: DomainSpec, params: ParamSet) -> None:
    if isinstance(domain, Interval):
        ok = domain.b > domain.a
    elif isinstance(domain, Rectangle):
        ok = domain.Lx > 0 and domain.Ly > 0
    elif isinstance(domain, Disk):
        ok = domain.R > 0
    else:
        raise TypeError(f"unsupported domain {domain!r}")
    if not ok or not domain.volume > 0:
        raise DegenerateDomain(f"{domain} has non-positive measure")
    lo, hi = sigma_range(domain)
    if not (lo < params.sigma < hi):
        raise SigmaOutOfRange(f"sigma={params.sigma} outside ({lo}, {hi}) for d={domain.dim}")


@dataclass
class Spectrum:
    """Sorted eigenvalues of one discrete (or semi-analytic) problem.

    ``eigenvectors`` holds one column per eigenvalue in the discrete basis; it is
    ``None`` for spectra assembled from analytic mode roots.
    """

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    residual_norms: Optional[np.ndarray] = None
    mesh_size: float = float("nan")
    dof_count: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def __getitem__(self, k):
        return self.eigenvalues[k]

    def lam(self, k: int) -> float:
        """1-based access, matching the lambda_k numbering."""
        return float(self.eigenvalues[k - 1])

    def check_invariants(self, A=None, B=None, tol: float = 1e-9) -> None:
        ev = np.asarray(self.eigenvalues)
        if np.any(np.diff(ev) < -tol * (1.0 + np.abs(ev[1:]))):
            raise AssertionError("eigenvalues not sorted")
        if self.eigenvectors is None or B is None:
            return
        V = self.eigenvectors
        G = V.T @ (B @ V)
        err = np.max(np.abs(G - np.eye(G.shape[0]))) if G.size else 0.0
        if err > tol:
            raise AssertionError(f"B-orthonormality error {err:.3e}")
        if A is not None and self.residual_norms is not None:
            nA, nB = np.linalg.norm(A, 2), np.linalg.norm(B, 2)
            bound = tol * (nA + np.abs(ev) * nB)
            if np.any(self.residual_norms > bound):
                raise AssertionError("residual above tolerance")


@dataclass(frozen=True)
class RateFit:
    exponent: float
    intercept: float
    stderr: float
    window: tuple
    n_points: int

    def to_json(self) -> dict:
        return {
            "exponent": self.exponent,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "window": list(self.window),
            "n_points": self.n_points,
        }


def as_params(p: Union[ParamSet, Mapping[str, Any], Sequence[float]]) -> ParamSet:
    if isinstance(p, ParamSet):
        return p
    if isinstance(p, Mapping):
        return ParamSet.from_json(p)
    return ParamSet(*p)
