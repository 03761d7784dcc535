"""Parameter sweeps, rate fits, limit gaps, alpha scaling and the Weyl check."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import oracles
from .assembly1d import assemble_interval, solve_form
from .assembly2d import assemble_rectangle
from .diskpolar import radial_form, radial_nodes
from .errors import NonMonotoneGap, OracleUnavailable, RobinBilapError, SignMismatch
from .hermite import graded_nodes, uniform_nodes
from .model import (BoundaryRegime, Disk, Interval, ParamSet, RateFit, Rectangle,
                    Spectrum, regime_of)

AXES = ("alpha", "beta", "gamma")
MONOTONE_TOL = 1e-9
MAX_INTERVAL_ELEMS = 900


# ---------------------------------------------------------------- discretization policy


def layer_scale(params: ParamSet) -> float:
    """Decay rate t* of boundary-layer eigenfunctions (0 when no layer is expected).

    The rates are the optimal exponents of the test functions e^{t x}: sqrt(|alpha|/2)
    (also the layer width 1/sqrt(alpha) for alpha -> +inf), 3|beta|/2 for
    beta < 0, (|gamma|/2)^(1/3) for gamma < 0.
    """
    t = math.sqrt(abs(params.alpha) / 2.0)
    if params.beta.is_finite and params.beta.value < 0:
        t = max(t, 1.5 * abs(params.beta.value))
    if params.gamma.is_finite and params.gamma.value < 0:
        t = max(t, (abs(params.gamma.value) / 2.0) ** (1.0 / 3.0))
    return t


def interval_nodes(domain: Interval, params: ParamSet, n_base: int = 64) -> np.ndarray:
    L = domain.length
    t = layer_scale(params)
    n = n_base
    if params.alpha < 0:
        # resolve the bulk oscillation e^{i sqrt(|alpha|/2) x} with ~16 elements per wavelength
        wave = 2 * math.pi / math.sqrt(abs(params.alpha) / 2.0)
        n = min(MAX_INTERVAL_ELEMS, max(n, int(math.ceil(16 * L / wave))))
    if t * L < 8.0:
        return uniform_nodes(domain.a, domain.b, n)
    return graded_nodes(domain.a, domain.b, n, 1.0 / t, ratio=1.15)


def disk_nodes(R: float, params: ParamSet, n_base: int = 64) -> np.ndarray:
    t = layer_scale(params)
    n = n_base
    if params.alpha < 0:
        wave = 2 * math.pi / math.sqrt(abs(params.alpha) / 2.0)
        n = min(MAX_INTERVAL_ELEMS, max(n, int(math.ceil(16 * R / wave))))
    if t * R < 8.0:
        return uniform_nodes(0.0, R, n)
    return graded_nodes(0.0, R, n, 1.0 / t, ratio=1.15, left=False, right=True)


def lowest_eigenvalues(domain, params: ParamSet, k: int, disc: Optional[dict] = None) -> Spectrum:
    """First k eigenvalues (with multiplicity) on any model domain, mesh chosen per parameters."""
    disc = dict(disc or {})
    if isinstance(domain, Interval):
        nodes = disc.get("nodes")
        if nodes is None:
            nodes = interval_nodes(domain, params, disc.get("n", 64))
        form = assemble_interval(domain, params, nodes=nodes)
        return solve_form(form, k)
    if isinstance(domain, Rectangle):
        n = disc.get("n", 8)
        form = assemble_rectangle(domain, params, disc.get("nx", n), disc.get("ny", n))
        return solve_form(form, k)
    if isinstance(domain, Disk):
        nodes = disc.get("nodes")
        if nodes is None:
            nodes = disk_nodes(domain.R, params, disc.get("n", 64))
        return disk_fem_spectrum(domain.R, params, k, nodes, disc.get("m_cap", 80))
    raise TypeError(f"unsupported domain {domain!r}")


def disk_fem_spectrum(R: float, params: ParamSet, k: int, nodes: np.ndarray, m_cap: int = 80) -> Spectrum:
    """First k disk eigenvalues from radial modes on a given radial mesh.

    Modes are added while their lowest eigenvalue can still enter the first k;
    the scan stops after two consecutive modes that cannot.
    """
    vals: List[float] = []
    modes: List[int] = []
    res: List[float] = []
    miss = 0
    for m in range(m_cap + 1):
        form = radial_form(m, R, params, nodes=nodes)
        sp = solve_form(form, k)
        for lam, r in zip(sp.eigenvalues, sp.residual_norms):
            mult = 1 if m == 0 else 2
            vals.extend([lam] * mult)
            modes.extend([m] * mult)
            res.extend([r] * mult)
        cur = np.sort(vals)
        if len(cur) >= k and sp.eigenvalues[0] > cur[k - 1]:
            miss += 1
            if miss >= 2:
                break
        else:
            miss = 0
    order = np.argsort(vals, kind="stable")[:k]
    return Spectrum(np.array(vals)[order], None, np.array(res)[order],
                    mesh_size=float(np.max(np.diff(nodes))), dof_count=2 * len(nodes),
                    meta={"modes": np.array(modes)[order].tolist(), "method": "radial_fem"})


# ---------------------------------------------------------------- sweeps


@dataclass
class SweepPlan:
    domain: object
    base_params: ParamSet
    axis: str
    values: Sequence[float]
    k_track: Sequence[int] = (1,)
    solver: str = "auto"
    coupling: Optional[Tuple[str, float]] = None  # ("gamma", g~) means gamma = alpha * g~
    disc: dict = field(default_factory=dict)
    fixed_mesh: bool = False

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        v = np.asarray(self.values, dtype=float)
        d = np.diff(v)
        if len(v) < 1 or not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("sweep values must be strictly monotone")
        if not len(self.k_track):
            raise ValueError("k_track must be nonempty")

    def params_at(self, x: float) -> ParamSet:
        p = self.base_params.replace(**{self.axis: x})
        if self.coupling is not None:
            which, c = self.coupling
            p = p.replace(**{which: p.alpha * c})
        return p


@dataclass
class SweepRow:
    axis_value: float
    params: ParamSet
    lambdas: Dict[int, float]
    residuals: Dict[int, float]
    mesh_h: float
    status: str = "ok"


@dataclass
class SweepTable:
    plan: SweepPlan
    rows: List[SweepRow]
    monotone_violations: List[tuple] = field(default_factory=list)

    def column(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        ok = [r for r in self.rows if r.status == "ok"]
        return (np.array([r.axis_value for r in ok]), np.array([r.lambdas[k] for r in ok]))

    def records(self) -> List[dict]:
        """Flat rows (axis, k, lambda, residual, mesh_h, status) for CSV output."""
        out = []
        for r in self.rows:
            for k in self.plan.k_track:
                out.append({
                    "axis": r.axis_value,
                    "k": k,
                    "lambda": r.lambdas.get(k, float("nan")),
                    "residual": r.residuals.get(k, float("nan")),
                    "mesh_h": r.mesh_h,
                    "status": r.status,
                })
        return out


def _fixed_disc(plan: SweepPlan) -> dict:
    """One mesh for the whole sweep, graded for the most demanding row."""
    disc = dict(plan.disc)
    if not plan.fixed_mesh or "nodes" in disc:
        return disc
    vals = np.asarray(plan.values, dtype=float)
    worst = max((plan.params_at(x) for x in vals), key=layer_scale)
    if isinstance(plan.domain, Interval):
        disc["nodes"] = interval_nodes(plan.domain, worst, disc.get("n", 64))
    elif isinstance(plan.domain, Disk):
        disc["nodes"] = disk_nodes(plan.domain.R, worst, disc.get("n", 64))
    return disc


def _solve_row(plan: SweepPlan, x: float, disc: dict) -> SweepRow:
    try:
        p = plan.params_at(x)
    except (RobinBilapError, ValueError) as exc:
        return SweepRow(x, plan.base_params, {}, {}, float("nan"), f"error:{type(exc).__name__}")
    kmax = max(plan.k_track)
    try:
        sp = lowest_eigenvalues(plan.domain, p, kmax, disc)
    except (RobinBilapError, ValueError, ArithmeticError) as exc:
        return SweepRow(x, p, {}, {}, float("nan"), f"error:{type(exc).__name__}")
    res = sp.residual_norms if sp.residual_norms is not None else np.full(len(sp.eigenvalues), np.nan)
    return SweepRow(x, p, {k: float(sp.eigenvalues[k - 1]) for k in plan.k_track},
                    {k: float(res[k - 1]) for k in plan.k_track}, float(sp.mesh_size))


def run_sweep(plan: SweepPlan, jobs: int = 1) -> SweepTable:
    """One solve per axis value; failed rows are recorded, not raised.

    For uncoupled sweeps the theorem-backed monotonicity in the axis
    parameter is checked and violations are listed on the table.
    """
    disc = _fixed_disc(plan)
    vals = [float(v) for v in plan.values]
    if jobs and jobs > 1:
        from joblib import Parallel, delayed

        rows = Parallel(n_jobs=jobs)(delayed(_solve_row)(plan, x, disc) for x in vals)
    else:
        rows = [_solve_row(plan, x, disc) for x in vals]
    table = SweepTable(plan, list(rows))
    if plan.coupling is None:
        table.monotone_violations = monotone_violations(table)
    return table


def monotone_violations(table: SweepTable, tol: float = MONOTONE_TOL) -> List[tuple]:
    """Pairs of consecutive rows where some lambda_k decreases as the axis value increases."""
    out = []
    for k in table.plan.k_track:
        x, lam = table.column(k)
        if len(x) < 2:
            continue
        order = np.argsort(x)
        x, lam = x[order], lam[order]
        scale = np.maximum(1.0, np.maximum(np.abs(lam[1:]), np.abs(lam[:-1])))
        bad = np.nonzero(lam[1:] - lam[:-1] < -tol * scale)[0]
        out.extend((k, float(x[i]), float(x[i + 1]), float(lam[i + 1] - lam[i])) for i in bad)
    return out


# ---------------------------------------------------------------- fits


def default_window(axis_values: np.ndarray, mode: str = "drop30") -> np.ndarray:
    """Boolean mask: drop the smallest 30% of |axis|, or keep the last decade of |axis|."""
    a = np.abs(np.asarray(axis_values, dtype=float))
    if mode == "decade":
        return a >= a.max() / 10.0 * (1 - 1e-12)
    cut = np.quantile(a, 0.3)
    return a >= cut


def fit_power(x, y, mask=None) -> RateFit:
    """Least-squares slope of log|y| on log|x|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if mask is None:
        mask = np.ones(len(x), dtype=bool)
    idx = np.nonzero(mask)[0]
    if len(idx) < 4:
        raise ValueError("a rate fit needs at least 4 points")
    sy = np.sign(y[idx])
    if np.any(sy == 0) or np.any(sy != sy[0]):
        raise SignMismatch("values in the fit window do not share one sign")
    lx, ly = np.log(np.abs(x[idx])), np.log(np.abs(y[idx]))
    r = stats.linregress(lx, ly)
    stderr = float(r.stderr) if np.isfinite(r.stderr) else 0.0
    return RateFit(float(r.slope), float(r.intercept), abs(stderr), (int(idx[0]), int(idx[-1])), len(idx))


def fit_rate(table: SweepTable, k: int = 1, window: object = "drop30") -> RateFit:
    x, lam = table.column(k)
    if isinstance(window, str):
        mask = default_window(x, window)
    elif window is None:
        mask = np.ones(len(x), dtype=bool)
    else:
        mask = np.zeros(len(x), dtype=bool)
        mask[window[0]:window[1] + 1] = True
    return fit_power(x, lam, mask)


# ---------------------------------------------------------------- limits


@dataclass
class LimitReport:
    axis: str
    values: np.ndarray
    k: int
    lambdas: np.ndarray
    limit: float
    gaps: np.ndarray
    monotone: bool
    rate_fit: Optional[RateFit]
    scaled_gap: np.ndarray  # gap * sqrt(axis)
    bounded: bool

    def to_json(self) -> dict:
        return {
            "axis": self.axis,
            "k": self.k,
            "values": self.values.tolist(),
            "lambdas": self.lambdas.tolist(),
            "limit": self.limit,
            "gaps": self.gaps.tolist(),
            "monotone": self.monotone,
            "rate_fit": None if self.rate_fit is None else self.rate_fit.to_json(),
            "scaled_gap": self.scaled_gap.tolist(),
            "bounded": self.bounded,
        }


def limit_convergence(domain, base_params: ParamSet, axis: str, target: BoundaryRegime,
                      values: Sequence[float], k: int = 1, disc: Optional[dict] = None,
                      tol: float = 1e-9) -> LimitReport:
    """Gaps lambda_k(limit) - lambda_k(axis value) on one mesh shared with the limit problem.

    ``axis`` is "beta", "gamma" or "joint" (beta = gamma = value).  The
    discrete eigenvalues inherit min-max monotonicity on a fixed space, so a
    negative or increasing gap beyond ``tol`` raises NonMonotoneGap.
    """
    vals = np.asarray(values, dtype=float)
    if np.any(vals <= 0) or np.any(np.diff(vals) <= 0):
        raise ValueError("limit sweeps need positive increasing values")
    inf = float("inf")

    def at(x):
        if axis == "joint":
            return base_params.replace(beta=x, gamma=x)
        return base_params.replace(**{axis: x})

    lim_params = base_params
    if target.clamps_value:
        lim_params = lim_params.replace(gamma=inf)
    if target.clamps_normal:
        lim_params = lim_params.replace(beta=inf)
    disc = dict(disc or {})
    if "nodes" not in disc and isinstance(domain, (Interval, Disk)):
        # the finite-parameter rows are positive here, so only alpha shapes the mesh
        if isinstance(domain, Interval):
            disc["nodes"] = interval_nodes(domain, base_params, disc.get("n", 64))
        else:
            disc["nodes"] = disk_nodes(domain.R, base_params, disc.get("n", 64))
    lam = np.array([lowest_eigenvalues(domain, at(x), k, disc).eigenvalues[k - 1] for x in vals])
    lim = float(lowest_eigenvalues(domain, lim_params, k, disc).eigenvalues[k - 1])
    gaps = lim - lam
    scale = max(1.0, abs(lim))
    monotone = bool(np.all(gaps >= -tol * scale) and np.all(np.diff(gaps) <= tol * scale))
    if not monotone:
        raise NonMonotoneGap(f"gap sequence not nonincreasing/nonnegative: {gaps}")
    fit = None
    pos = gaps > 1e-12 * scale
    if pos.sum() >= 4:
        mask = pos & default_window(vals)
        if mask.sum() < 4:
            mask = pos
        f = fit_power(vals, gaps, mask)
        fit = RateFit(-f.exponent, f.intercept, f.stderr, f.window, f.n_points)
    scaled = gaps * np.sqrt(vals)
    half = len(vals) // 2
    bounded = bool(np.all(np.isfinite(scaled)) and np.max(scaled[half:]) <= np.max(scaled[:half + 1]) * (1 + 1e-6) + tol * scale)
    return LimitReport(axis, vals, k, lam, lim, gaps, monotone, fit, scaled, bounded)


# ---------------------------------------------------------------- alpha -> +inf


def laplacian_oracle(domain, regime: BoundaryRegime, k: int, coupling=None) -> float:
    """k-th eigenvalue of the second-order limit problem selected by regime and coupling."""
    if coupling is not None:
        which, c = coupling
        if which == "gamma":
            if isinstance(domain, Interval):
                return oracles.robin_laplacian_1d(k, c, domain.length)
            if isinstance(domain, Disk):
                return oracles.robin_laplacian_disk(k, c, domain.R)
            if isinstance(domain, Rectangle):
                return _rectangle_sum(k, lambda j, L: oracles.robin_laplacian_1d(j, c, L), domain)
        if which == "beta":
            if isinstance(domain, Rectangle) and c < 0:
                raise OracleUnavailable("beta = alpha * b~ with b~ < 0 on a non-smooth domain is an open problem")
            return laplacian_oracle(domain, BoundaryRegime.FULL_ROBIN, k)
        raise ValueError(f"unknown coupling {coupling!r}")
    dirichlet = regime in (BoundaryRegime.NAVIER_ROBIN, BoundaryRegime.DIRICHLET)
    if isinstance(domain, Interval):
        return (oracles.dirichlet_laplacian_1d if dirichlet else oracles.neumann_laplacian_1d)(k, domain.length)
    if isinstance(domain, Disk):
        return (oracles.dirichlet_laplacian_disk if dirichlet else oracles.neumann_laplacian_disk)(k, domain.R)
    if isinstance(domain, Rectangle):
        f = oracles.dirichlet_laplacian_1d if dirichlet else oracles.neumann_laplacian_1d
        return _rectangle_sum(k, f, domain)
    raise TypeError(f"unsupported domain {domain!r}")


def _rectangle_sum(k: int, f1d, domain: Rectangle) -> float:
    n = k + 2
    xs = [f1d(i, domain.Lx) for i in range(1, n + 1)]
    ys = [f1d(j, domain.Ly) for j in range(1, n + 1)]
    return float(np.sort(np.add.outer(xs, ys).ravel())[k - 1])


@dataclass
class ScalingReport:
    alphas: np.ndarray
    ratios: np.ndarray
    limit: float
    oracle: float
    rel_err: float
    cauchy: float  # spread of the ratios over the last decade, relative

    def to_json(self) -> dict:
        return {"alphas": self.alphas.tolist(), "ratios": self.ratios.tolist(), "limit": self.limit,
                "oracle": self.oracle, "rel_err": self.rel_err, "cauchy": self.cauchy}


def alpha_scaling(domain, params: ParamSet, coupling, k: int, alphas: Sequence[float],
                  disc: Optional[dict] = None) -> ScalingReport:
    """lambda_k(alpha)/alpha along alpha -> +inf against the Laplacian limit eigenvalue."""
    a = np.asarray(alphas, dtype=float)
    if np.any(a <= 0):
        raise ValueError("alpha values must be positive")
    regime = regime_of(params)
    oracle = laplacian_oracle(domain, regime, k, coupling)
    ratios = []
    for al in a:
        p = params.replace(alpha=al)
        if coupling is not None:
            p = p.replace(**{coupling[0]: al * coupling[1]})
        lam = lowest_eigenvalues(domain, p, k, disc).eigenvalues[k - 1]
        ratios.append(lam / al)
    ratios = np.array(ratios)
    last = default_window(a, "decade")
    spread = float(np.ptp(ratios[last]) / max(abs(ratios[-1]), 1e-300)) if last.sum() > 1 else float("nan")
    lim = float(ratios[-1])
    return ScalingReport(a, ratios, lim, oracle, abs(lim - oracle) / max(abs(oracle), 1e-300), spread)


# ---------------------------------------------------------------- Weyl


def weyl_value(k: int, domain) -> float:
    d = domain.dim
    omega = {1: 2.0, 2: math.pi}[d]
    return (2 * math.pi) ** 4 * (k / (omega * domain.volume)) ** (4.0 / d)


@dataclass
class WeylReport:
    ks: np.ndarray
    ratios: np.ndarray
    max_dev: float

    def to_json(self) -> dict:
        return {"ks": self.ks.tolist(), "ratios": self.ratios.tolist(), "max_dev": self.max_dev}


def weyl_check(spectrum, domain, window: Optional[Tuple[int, int]] = None) -> WeylReport:
    """Ratios lambda_k / weyl_k over a mid-range k window (defaults to the middle third)."""
    ev = np.asarray(spectrum.eigenvalues if hasattr(spectrum, "eigenvalues") else spectrum, dtype=float)
    n = len(ev)
    if window is None:
        window = (max(1, n // 3), max(1, 2 * n // 3))
    ks = np.arange(window[0], window[1] + 1)
    ratios = np.array([ev[k - 1] / weyl_value(int(k), domain) for k in ks])
    return WeylReport(ks, ratios, float(np.max(np.abs(ratios - 1.0))))
