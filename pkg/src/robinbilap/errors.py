"""Exception hierarchy shared by every module."""


class RobinBilapError(Exception):
    """Base class for all package errors."""


class SigmaOutOfRange(RobinBilapError, ValueError):
    pass


class DegenerateDomain(RobinBilapError, ValueError):
    pass


class ZeroVector(RobinBilapError, ValueError):
    pass


class NotSPD(RobinBilapError, ArithmeticError):
    pass


class NoConvergence(RobinBilapError, ArithmeticError):
    pass


class IndefiniteOnKernel(RobinBilapError, ArithmeticError):
    pass


class RankDetectionAmbiguous(RobinBilapError, ArithmeticError):
    pass


class OverflowGuard(RobinBilapError, OverflowError):
    pass


class SignMismatch(RobinBilapError, ValueError):
    pass


class NonMonotoneGap(RobinBilapError, AssertionError):
    """A theorem-backed monotonicity was violated; this points at a solver bug."""


class OracleUnavailable(RobinBilapError, NotImplementedError):
    pass


class RegimeUnsupported(RobinBilapError, ValueError):
    pass


class MissingConstants(RobinBilapError, ValueError):
    pass


class MissingTraceOrder(RobinBilapError, KeyError):
    pass


class IncompleteCluster(RobinBilapError, ValueError):
    pass


class ConfigError(RobinBilapError, ValueError):
    pass
