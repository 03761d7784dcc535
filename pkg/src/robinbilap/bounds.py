"""Upper certificates from exponential test functions and empirical lower bounds.

The upper bound evaluates the Rayleigh quotient of exp(t xi.x), which is an
admissible test function only when no boundary trace is prescribed, i.e. in
the FullRobin regime.  The lower bound minimizes the numerical-range estimate
with trace constants fitted over a discrete space; it is labelled empirical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .assembly1d import assemble_interval, principal
from .assembly2d import assemble_rectangle
from .diskpolar import radial_form
from .eigsolve import PencilProblem, solve_gevp
from .errors import MissingConstants, RegimeUnsupported
from .model import BoundaryRegime, Disk, Interval, ParamSet, Rectangle, regime_of

SAFETY = 1.1
N_DIRECTIONS_2D = 32
# coefficients of -|axis|^p that the optimized certificates approach
COEFFICIENTS = {"alpha": 0.25, "beta": 27.0 / 16.0, "gamma": 0.5 ** (1.0 / 3.0) * 1.5}
POWERS = {"alpha": 2.0, "beta": 4.0, "gamma": 4.0 / 3.0}


@dataclass
class Certificate:
    t: float
    xi: tuple
    upper_bound: float
    components: Dict[str, float]
    f1: float
    f2: float
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"t": self.t, "xi": list(self.xi), "upper_bound": self.upper_bound,
                "components": dict(self.components), "f1": self.f1, "f2": self.f2,
                "meta": dict(self.meta)}


def _xcothx(a: float, L: float) -> float:
    """a * coth(a L), continuous (value 1/L) at a = 0 and even in a."""
    z = abs(a) * L
    if z < 1e-8:
        return (1.0 + z * z / 3.0) / L
    return abs(a) / math.tanh(z)


def _disk_ratios(t: float, R: float):
    """f1 and f2 for exp(t x) on the disk by trapezoid quadrature on the boundary.

    The volume integral is turned into a boundary one by the divergence
    theorem; every integrand carries the scale exp(-2tR).
    """
    z = 2.0 * t * R
    n = 256 + 32 * int(math.ceil(math.sqrt(2.0 * z)))
    th = 2.0 * math.pi * np.arange(n) / n
    c = np.cos(th)
    w = np.exp(z * (c - 1.0))
    e0 = w.mean()  # int e^{2tx} dtheta / (2 pi), scaled
    e1 = (w * c).mean()
    e2 = (w * c * c).mean()
    vol = R * e1 / (2.0 * t)  # times 2 pi e^{z}
    f2 = R * e0 / (2.0 * t * vol)
    f1 = t * t * R * e2 / (2.0 * t ** 3 * vol)
    return f1, f2


def boundary_ratios(domain, t: float, xi=None):
    """(f1(t), f2(t)) for the unnormalized function exp(t xi.x)."""
    if t <= 0:
        raise ValueError("t must be positive")
    if isinstance(domain, Interval):
        r = 2.0 * _xcothx(t, domain.length) / (2.0 * t)
        return r, r
    if isinstance(domain, Rectangle):
        c, s = _unit(xi)
        Rx = 2.0 * _xcothx(t * c, domain.Lx)
        Ry = 2.0 * _xcothx(t * s, domain.Ly)
        f1 = t * t * (c * c * Rx + s * s * Ry) / (2.0 * t ** 3)
        f2 = (Rx + Ry) / (2.0 * t)
        return f1, f2
    if isinstance(domain, Disk):
        return _disk_ratios(t, domain.R)
    raise TypeError(f"unsupported domain {domain!r}")


def _unit(xi):
    if xi is None:
        return 1.0, 0.0
    v = np.asarray(xi, dtype=float).ravel()
    if v.size == 1:
        return float(np.sign(v[0]) or 1.0), 0.0
    v = v / np.linalg.norm(v)
    return float(v[0]), float(v[1])


def exp_certificate(domain, params: ParamSet, t: float, xi=None) -> Certificate:
    """Rayleigh quotient of exp(t xi.x); an upper bound for lambda_1 in the FullRobin regime."""
    if regime_of(params) is not BoundaryRegime.FULL_ROBIN:
        raise RegimeUnsupported("exponential test functions need a form domain without prescribed traces")
    f1, f2 = boundary_ratios(domain, t, xi)
    a, b, g = params.alpha, params.beta.value, params.gamma.value
    comp = {"t4": t ** 4, "alpha_t2": a * t * t, "beta_term": 2.0 * b * f1 * t ** 3,
            "gamma_term": 2.0 * g * f2 * t}
    ub = comp["t4"] + comp["alpha_t2"] + comp["beta_term"] + comp["gamma_term"]
    xi_out = tuple(float(x) for x in _unit(xi)[: domain.dim])
    return Certificate(float(t), xi_out, float(ub), comp, float(f1), float(f2))


def directions(domain) -> list:
    if domain.dim == 1:
        return [(1.0,), (-1.0,)]
    if isinstance(domain, Disk):
        return [(1.0, 0.0)]  # rotation invariant
    th = 2.0 * math.pi * np.arange(N_DIRECTIONS_2D) / N_DIRECTIONS_2D
    return [(math.cos(a), math.sin(a)) for a in th]


def axis_t(params: ParamSet, axis: str) -> float:
    if axis == "alpha":
        val = params.alpha
        t = math.sqrt(abs(val) / 2.0)
    elif axis == "beta":
        val = params.beta.value
        t = 1.5 * abs(val)
    elif axis == "gamma":
        val = params.gamma.value
        t = (abs(val) / 2.0) ** (1.0 / 3.0)
    else:
        raise ValueError(f"unknown axis {axis!r}")
    if not val < 0:
        raise ValueError(f"optimized certificate needs a negative {axis}")
    return t


def optimized_certificate(domain, params: ParamSet, axis: str) -> Certificate:
    """Certificate at the axis-optimal t, best over the direction grid."""
    t = axis_t(params, axis)
    best = min((exp_certificate(domain, params, t, d) for d in directions(domain)),
               key=lambda c: c.upper_bound)
    p = POWERS[axis]
    val = {"alpha": params.alpha, "beta": params.beta.value, "gamma": params.gamma.value}[axis]
    best.meta.update(axis=axis, ratio=best.upper_bound / (-abs(val) ** p), coefficient=COEFFICIENTS[axis])
    return best


def best_certificate(domain, params: ParamSet, t_range=(1e-3, 1e4)) -> Certificate:
    """Smallest certificate over t (bounded scalar search in log t) and the direction grid."""
    best = None
    lo, hi = math.log(t_range[0]), math.log(t_range[1])
    for d in directions(domain):
        f = lambda s, d=d: exp_certificate(domain, params, math.exp(s), d).upper_bound
        grid = np.linspace(lo, hi, 60)
        vals = [f(s) for s in grid]
        i = int(np.argmin(vals))
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        r = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
        s = r.x if r.fun <= vals[i] else grid[i]
        c = exp_certificate(domain, params, math.exp(s), d)
        if best is None or c.upper_bound < best.upper_bound:
            best = c
    return best


# ---------------------------------------------------------------- numerical range


@dataclass
class TraceConstants:
    """Fitted constants of the three interpolation/trace inequalities.

    With x = sqrt(||D2 u||^2 + ||u||^2) for ||u|| = 1 they read
    ||grad u||^2 <= C x,  ||u_nu||^2_bdry <= C1 x^1.5 + C2 x,  ||u||^2_bdry <= C3 x^0.5 + C4.
    """

    C: float
    C1: float
    C2: float
    C3: float
    C4: float
    safety: float = SAFETY
    sigma: float = 0.0
    maximizers: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"C": self.C, "C1": self.C1, "C2": self.C2, "C3": self.C3, "C4": self.C4,
                "safety": self.safety, "sigma": self.sigma, "empirical": True,
                "maximizers": {k: {kk: vv for kk, vv in v.items() if kk != "vector"}
                               for k, v in self.maximizers.items()}}


EXPONENTS = {"grad": 0.5, "normal": 0.75, "trace": 0.25}
PIECES = {"grad": "L", "normal": "T", "trace": "Mb"}


def _top(Lm, Bm, vectors=False):
    sp = solve_gevp(PencilProblem(Lm, Bm, want_vectors=vectors))
    if vectors:
        return sp.eigenvalues[-1], sp.eigenvectors[:, -1]
    return sp.eigenvalues[-1], None


def homogeneous_sup(Lm: np.ndarray, N: np.ndarray, M: np.ndarray, a: float, n_grid: int = 48):
    """sup over u of L(u) / (M(u) (N(u)/M(u))^a) for 0 < a < 1.

    Concavity of y^a gives y^a = min over tau of a tau^(a-1) y + (1-a) tau^a,
    so the sup equals the max over tau of the top eigenvalue of the pencil
    (L, a tau^(a-1) N + (1-a) tau^a M).  tau ranges over the attainable
    values of N/M.
    """
    ev = solve_gevp(PencilProblem(N, M, want_vectors=False)).eigenvalues
    ylo, yhi = max(ev[0], 1e-300), ev[-1]
    g = lambda s: _top(Lm, a * math.exp(s) ** (a - 1) * N + (1 - a) * math.exp(s) ** a * M)[0]
    lo, hi = math.log(ylo), math.log(yhi)
    grid = np.linspace(lo, hi, n_grid) if hi > lo else np.array([lo])
    vals = np.array([g(s) for s in grid])
    i = int(np.argmax(vals))
    s_best, v_best = grid[i], vals[i]
    if len(grid) > 1:
        a_, b_ = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        r = minimize_scalar(lambda s: -g(s), bounds=(a_, b_), method="bounded", options={"xatol": 1e-6})
        if -r.fun > v_best:
            s_best, v_best = r.x, -r.fun
    tau = math.exp(s_best)
    _, vec = _top(Lm, a * tau ** (a - 1) * N + (1 - a) * tau ** a * M, vectors=True)
    return float(v_best), tau, vec


def _forms_for_constants(domain, disc: dict, sigma: float):
    """Unconstrained full matrices of the discrete space, one block per radial mode on the disk."""
    p0 = ParamSet(sigma, 0.0, 0.0, 0.0)
    if isinstance(domain, Interval):
        form = assemble_interval(domain, p0, n_elems=disc.get("n", 64), nodes=disc.get("nodes"))
        return [("interval", form.full)]
    if isinstance(domain, Rectangle):
        n = disc.get("n", 8)
        form = assemble_rectangle(domain, p0, disc.get("nx", n), disc.get("ny", n))
        return [("rectangle", form.full)]
    if isinstance(domain, Disk):
        out = []
        for m in range(disc.get("m_max", 16) + 1):
            form = radial_form(m, domain.R, p0, n_elems=disc.get("n", 48), nodes=disc.get("nodes"))
            out.append((f"m={m}", form.full))
        return out
    raise TypeError(f"unsupported domain {domain!r}")


def _blocks_with_N(domain, disc, sigma):
    out = []
    for name, full in _forms_for_constants(domain, disc, sigma):
        N = principal(full, sigma) + full["M"]
        out.append((name, full, 0.5 * (N + N.T)))
    return out


def estimate_trace_constants(domain, disc: Optional[dict] = None, sigma: float = 0.0,
                             safety: float = SAFETY) -> TraceConstants:
    """Smallest constants valid over the discrete space, inflated by ``safety``.

    C2 and C4 are set to zero: the mass term inside x already absorbs the
    lower-order contributions.
    """
    disc = dict(disc or {})
    fitted, maxim = {}, {}
    for key, a in EXPONENTS.items():
        best = (-np.inf, None, None, None)
        for name, full, N in _blocks_with_N(domain, disc, sigma):
            v, tau, vec = homogeneous_sup(full[PIECES[key]], N, full["M"], a)
            if v > best[0]:
                best = (v, tau, vec, name)
        fitted[key] = best[0]
        maxim[key] = {"sup": best[0], "tau": best[1], "block": best[3], "vector": best[2]}
    return TraceConstants(C=safety * fitted["grad"], C1=safety * fitted["normal"], C2=0.0,
                          C3=safety * fitted["trace"], C4=0.0, safety=safety, sigma=sigma,
                          maximizers=maxim)


def inequality_ratios(full: dict, sigma: float, u: np.ndarray) -> Dict[str, float]:
    """Left side over the x-power of each inequality for one coefficient vector (unnormalized)."""
    N = principal(full, sigma) + full["M"]
    m = float(u @ full["M"] @ u)
    if m <= 0:
        raise ValueError("zero vector")
    y = float(u @ N @ u) / m
    return {key: float(u @ full[PIECES[key]] @ u) / (m * y ** a) for key, a in EXPONENTS.items()}


def numerical_range_lower_bound(domain, params: ParamSet, fitted_constants: Optional[TraceConstants]) -> float:
    """min over x >= 1 of x^2 - 1 + min(0,a) C x + min(0,b)(C1 x^1.5 + C2 x) + min(0,g)(C3 x^0.5 + C4).

    ||D2 u||^2 = x^2 - 1 for ||u|| = 1; labelled empirical since the
    constants are fitted, not proven.
    """
    c = fitted_constants
    if c is None or any(getattr(c, k, None) is None for k in ("C", "C1", "C2", "C3", "C4")):
        raise MissingConstants("estimate_trace_constants must be run first")
    a = min(0.0, params.alpha)
    b = min(0.0, params.beta.finite_or(0.0))
    g = min(0.0, params.gamma.finite_or(0.0))

    def q(x):
        return x * x - 1.0 + a * c.C * x + b * (c.C1 * x ** 1.5 + c.C2 * x) + g * (c.C3 * math.sqrt(x) + c.C4)

    # beyond x_hi the quadratic dominates every negative term
    x_hi = 4.0 * (1.0 + abs(a) * c.C + (abs(b) * c.C1) ** 2 + abs(b) * c.C2 + (abs(g) * c.C3) ** (2.0 / 3.0))
    grid = np.exp(np.linspace(0.0, math.log(x_hi), 4000))
    vals = np.array([q(x) for x in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    r = minimize_scalar(q, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * hi})
    return float(min(vals[i], r.fun))


def sandwich(domain, params: ParamSet, lam1: float, constants: TraceConstants) -> dict:
    lower = numerical_range_lower_bound(domain, params, constants)
    upper = best_certificate(domain, params).upper_bound
    return {"bound_lower": lower, "lambda1": lam1, "bound_upper": upper,
            "ok": bool(lower <= lam1 <= upper)}
