"""Disk eigenvalues mode by mode: boundary determinant and radial FEM.

For u = f(r) cos(m theta) the equation Lap^2 u - alpha Lap u = lambda u
factors as (Lap_m - t1)(Lap_m - t2) f = 0 with t1 + t2 = alpha and
t1 t2 = -lambda.  The solutions regular at the origin are
w(t; r) = sum_k t^k (r/2)^(2k+m) / (k! (k+m)!), i.e. I_m(sqrt(t) r) for t > 0
and J_m(sqrt(-t) r) for t < 0 up to normalization.  Instead of w(t1), w(t2)
the determinant uses the symmetric pair

    g1 = (w(t1) + w(t2)) / 2,        g2 = (w(t1) - w(t2)) / (t1 - t2),

whose coefficients A_k, E_k obey X_{k+1} = alpha X_k + lambda X_{k-1}.  Both
are real and entire in (alpha, lambda), so the determinant has no branch
switches and no special case at the double root t1 = t2.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import mpmath
import numpy as np
from scipy.optimize import brentq

from . import hermite
from .assembly1d import DiscreteForm, build_form, solve_form
from .eigsolve import PencilProblem, solve_gevp
from .errors import OverflowGuard
from .model import BoundaryRegime, Disk, ParamSet, Spectrum, regime_of, validate

GAUSS_RADIAL = 10
FLOAT_SERIES_MAX_X = 6.0
OVERFLOW_X = 600.0


# ---------------------------------------------------------------- factorization


def factorize(lam: float, alpha: float):
    """Roots of t^2 - alpha t - lambda with the regular basis type of each root."""
    disc = alpha * alpha + 4.0 * lam
    if disc >= 0:
        sq = math.sqrt(disc)
        t1, t2 = 0.5 * (alpha + sq), 0.5 * (alpha - sq)
    else:
        sq = cmath.sqrt(disc)
        t1, t2 = 0.5 * (alpha + sq), 0.5 * (alpha - sq)

    def kind(t):
        if isinstance(t, complex) and t.imag != 0.0:
            return "complex"
        t = t.real if isinstance(t, complex) else t
        if t > 0:
            return "I"
        if t < 0:
            return "J"
        return "power"

    return t1, t2, (kind(t1), kind(t2))


# ---------------------------------------------------------------- analytic basis


def _series_x(alpha: float, lam: float, R: float) -> float:
    """sqrt(max |t_i|) * R, the Bessel argument controlling series growth."""
    tmax = 0.5 * abs(alpha) + math.sqrt(0.25 * alpha * alpha + abs(lam))
    return math.sqrt(tmax) * R


def _falling(p: int, j: int) -> int:
    out = 1
    for i in range(j):
        out *= p - i
    return out


def _basis_float(m: int, alpha: float, lam: float, r: np.ndarray, nder: int):
    """Derivatives 0..nder of (g1, g2) at radii r (> 0), float arithmetic."""
    r = np.asarray(r, dtype=float)
    y2 = (r / 2.0) ** 2
    q = (r / 2.0) ** m / math.factorial(m)
    out = np.zeros((2, nder + 1) + r.shape)
    a_prev, a_cur = 0.0, 1.0  # A_{-1} is unused; A_0 = 1, A_1 = alpha/2
    e_prev, e_cur = 0.0, 0.0
    x = _series_x(alpha, lam, float(np.max(r)) if r.size else 0.0)
    kmin = int(2 * x) + 10
    peak = 0.0
    k = 0
    while True:
        p = 2 * k + m
        for j in range(nder + 1):
            fj = _falling(p, j)
            if fj == 0:
                continue
            rj = q * fj / r ** j
            out[0, j] += a_cur * rj
            out[1, j] += e_cur * rj
        mag = float(np.max(np.abs(q))) * max(abs(a_cur), abs(e_cur)) * (p + 1) ** nder
        peak = max(peak, mag)
        if k > kmin and mag < 1e-18 * peak:
            break
        if k > 4000:
            break
        # advance k -> k+1
        if k == 0:
            a_next, e_next = 0.5 * alpha, 1.0
        else:
            a_next = alpha * a_cur + lam * a_prev
            e_next = alpha * e_cur + lam * e_prev
        a_prev, a_cur = a_cur, a_next
        e_prev, e_cur = e_cur, e_next
        q = q * y2 / ((k + 1) * (k + 1 + m))
        k += 1
    return out


def _basis_mp(m: int, alpha: float, lam: float, r: float, nder: int, dps: int):
    with mpmath.workdps(dps):
        al = mpmath.mpf(alpha)
        la = mpmath.mpf(lam)
        rr = mpmath.mpf(r)
        y2 = (rr / 2) ** 2
        q = (rr / 2) ** m / mpmath.factorial(m)
        out = [[mpmath.mpf(0)] * (nder + 1) for _ in range(2)]
        a_prev, a_cur = mpmath.mpf(0), mpmath.mpf(1)
        e_prev, e_cur = mpmath.mpf(0), mpmath.mpf(0)
        x = _series_x(alpha, lam, r)
        kmin = int(2 * x) + 10
        peak = mpmath.mpf(0)
        tiny = mpmath.mpf(10) ** (-dps - 5)
        k = 0
        while True:
            p = 2 * k + m
            for j in range(nder + 1):
                fj = _falling(p, j)
                if fj == 0:
                    continue
                rj = q * fj / rr ** j
                out[0][j] += a_cur * rj
                out[1][j] += e_cur * rj
            mag = abs(q) * max(abs(a_cur), abs(e_cur)) * (p + 1) ** nder
            if mag > peak:
                peak = mag
            if k > kmin and mag < tiny * peak:
                break
            if k == 0:
                a_next, e_next = al / 2, mpmath.mpf(1)
            else:
                a_next = al * a_cur + la * a_prev
                e_next = al * e_cur + la * e_prev
            a_prev, a_cur = a_cur, a_next
            e_prev, e_cur = e_cur, e_next
            q = q * y2 / ((k + 1) * (k + 1 + m))
            k += 1
        return out


def basis_derivatives(m: int, alpha: float, lam: float, r: float, nder: int = 3, exact: bool = False):
    """(2, nder+1) array of d^j g_i / dr^j at radius r.

    Float arithmetic is used while the Bessel argument stays small; beyond
    that the series is summed in mpmath with enough digits to absorb the
    cancellation between growing and oscillating parts.  Returned values are
    mpf when the extended-precision path is used (callers normalize before
    converting).
    """
    x = _series_x(alpha, lam, r)
    if x > OVERFLOW_X:
        raise OverflowGuard(f"Bessel argument {x:.1f} beyond the supported range")
    if x <= FLOAT_SERIES_MAX_X and not exact:
        return _basis_float(m, alpha, lam, np.array([r]), nder)[:, :, 0]
    dps = int(30 + 0.9 * x)
    return _basis_mp(m, alpha, lam, r, nder, dps), dps


# ---------------------------------------------------------------- boundary operators


def bending_op(m: int, R: float, sigma: float, f) -> object:
    """B_m(f) = f'' + sigma (f'/R - m^2 f / R^2): normal moment of f(r) cos(m theta)."""
    return f[2] + sigma * (f[1] / R - m * m * f[0] / R ** 2)


def shear_op(m: int, R: float, sigma: float, alpha: float, f) -> object:
    """Gamma_m(f) = alpha f' - (Lap_m f)' + (1 - sigma) m^2/R^2 (f' - f/R).

    The last term is the tangential divergence of the tangential part of
    D^2u nu, reduced for a single Fourier mode.
    """
    dlap = f[3] + f[2] / R - f[1] / R ** 2 - m * m * f[1] / R ** 2 + 2 * m * m * f[0] / R ** 3
    return alpha * f[1] - dlap + (1 - sigma) * (m * m / R ** 2) * (f[1] - f[0] / R)


def boundary_rows(m: int, R: float, params: ParamSet, f) -> Tuple[object, object]:
    """The two boundary conditions of the regime applied to derivative list f."""
    regime = regime_of(params)
    s, a = params.sigma, params.alpha
    if regime is BoundaryRegime.FULL_ROBIN:
        return (bending_op(m, R, s, f) + params.beta.value * f[1],
                shear_op(m, R, s, a, f) + params.gamma.value * f[0])
    if regime is BoundaryRegime.NAVIER_ROBIN:
        return (f[0], bending_op(m, R, s, f) + params.beta.value * f[1])
    if regime is BoundaryRegime.KUTTLER_SIGILLITO:
        return (f[1], shear_op(m, R, s, a, f) + params.gamma.value * f[0])
    return (f[0], f[1])


def _columns(m: int, lam: float, R: float, params: ParamSet, exact: bool = False):
    res = basis_derivatives(m, params.alpha, lam, R, 3, exact=exact)
    if isinstance(res, tuple):
        g, dps = res
        with mpmath.workdps(dps):
            cols = []
            for i in range(2):
                f = g[i]
                scale = mpmath.sqrt(sum((f[j] * mpmath.mpf(R) ** j) ** 2 for j in range(4)))
                b1, b2 = boundary_rows(m, R, params, f)
                cols.append((b1 / scale, b2 / scale))
            det = cols[0][0] * cols[1][1] - cols[0][1] * cols[1][0]
            M = np.array([[float(cols[0][0]), float(cols[1][0])], [float(cols[0][1]), float(cols[1][1])]])
            return M, float(det), g, True
    g = res
    cols = []
    for i in range(2):
        f = g[i]
        scale = math.sqrt(sum((f[j] * R ** j) ** 2 for j in range(4)))
        b1, b2 = boundary_rows(m, R, params, f)
        cols.append((b1 / scale, b2 / scale))
    M = np.array([[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]], dtype=float)
    return M, float(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]), g, False


def boundary_matrix(m: int, lam: float, R: float, params: ParamSet) -> np.ndarray:
    return _columns(m, lam, R, params)[0]


def boundary_determinant(m: int, lam: float, R: float, params: ParamSet) -> float:
    """Column-normalized determinant of the boundary conditions on (g1, g2); zero at eigenvalues."""
    return _columns(m, lam, R, params)[1]


# ---------------------------------------------------------------- radial FEM


def _radial_factors(m: int, nodes: np.ndarray):
    """Quadrature-point evaluation matrices of the energy ingredients.

    Returns (G, wr) where G[key] maps full dof vectors to the values of that
    ingredient at every Gauss point and wr holds weight * r.  Each piece of
    the energy is sum_terms c * G^T diag(wr) G.
    """
    h = np.diff(nodes)
    ne = len(h)
    s, w = hermite.gauss01(GAUSS_RADIAL)
    nq = len(s)
    r = nodes[:-1, None] + s[None, :] * h[:, None]  # (ne, q)
    N = hermite.shape(s[None, :], h[:, None])  # (4, 4, ne, q)
    f, f1, f2 = N[0], N[1], N[2]
    m2 = m * m
    parts = {
        "f": f,
        "f1": f1,
        "f2": f2,
        "d1": f1 / r - f / r ** 2,
        "hz": f1 / r - m2 * f / r ** 2,
        "lap": f2 + f1 / r - m2 * f / r ** 2,
        "f_r": f / r,
    }
    ndof = 2 * (ne + 1)
    rows = (np.arange(ne)[:, None] * nq + np.arange(nq)[None, :])  # (ne, q)
    G = {}
    for key, X in parts.items():
        Gk = np.zeros((ne * nq, ndof))
        for i in range(4):
            Gk[rows, 2 * np.arange(ne)[:, None] + i] = X[i]
        G[key] = Gk
    wr = (w[None, :] * h[:, None] * r).ravel()
    return G, wr


# energy pieces as (coefficient, ingredient) lists; m enters through the coefficients
def _piece_terms(m: int):
    m2 = float(m * m)
    return {
        "F": ((1.0, "f2"), (2.0 * m2, "d1"), (1.0, "hz")),
        "Lap": ((1.0, "lap"),),
        "L": ((1.0, "f1"), (m2, "f_r")),
        "M": ((1.0, "f"),),
    }


def _gram(G, wr, terms, V=None):
    out = 0.0
    for c, key in terms:
        X = G[key] if V is None else G[key] @ V
        out = out + c * (X.T @ (X * wr[:, None]))
    return out


def radial_constraints(m: int, n_nodes: int, regime: BoundaryRegime) -> np.ndarray:
    out = []
    if m == 0:
        out.append(1)
    elif m == 1:
        out.append(0)
    else:
        out.extend([0, 1])
    last = n_nodes - 1
    if regime.clamps_value:
        out.append(2 * last)
    if regime.clamps_normal:
        out.append(2 * last + 1)
    return np.array(sorted(out), dtype=int)


def radial_nodes(R: float, n_elems: int, layer: Optional[float] = None) -> np.ndarray:
    if layer is None or layer * 8 >= R / n_elems:
        return hermite.uniform_nodes(0.0, R, n_elems)
    return hermite.graded_nodes(0.0, R, n_elems, layer, left=False, right=True)


def radial_form(m: int, R: float, params: ParamSet, n_elems: int = 64,
                nodes: Optional[np.ndarray] = None) -> DiscreteForm:
    validate(Disk(R), params)
    if nodes is None:
        if n_elems < 4:
            raise ValueError("n_elems must be >= 4")
        nodes = radial_nodes(R, n_elems)
    nodes = np.asarray(nodes, dtype=float)
    ne = len(nodes) - 1
    ndof = 2 * (ne + 1)
    G, wr = _radial_factors(m, nodes)
    full = {}
    for key, terms in _piece_terms(m).items():
        E = _gram(G, wr, terms)
        full[key] = 0.5 * (E + E.T)
    T = np.zeros((ndof, ndof))
    Mb = np.zeros((ndof, ndof))
    T[ndof - 1, ndof - 1] = R
    Mb[ndof - 2, ndof - 2] = R
    full["T"], full["Mb"] = T, Mb
    nn = ne + 1
    meta = {
        "kind": "radial",
        "m": m,
        "R": R,
        "nodes": nodes,
        "dof_roles": ("f", "f_r"),
        "h_max": float(np.max(np.diff(nodes))),
        "constrained": {rg.value: radial_constraints(m, nn, rg) for rg in BoundaryRegime},
    }
    return build_form(full, meta, params)


def ritz_refine(form: DiscreteForm, V: np.ndarray, k: int):
    """Rayleigh-Ritz on span(V) with the energy rebuilt from quadrature values.

    Assembled stiffness matrices carry rounding of order eps * lambda_max,
    which swamps small eigenvalues on fine meshes.  Projecting through the
    evaluation matrices only ever squares well-conditioned derivative values,
    so the Ritz values inherit the discretization accuracy instead.
    """
    meta = form.basis_meta
    m, R = meta["m"], meta["R"]
    G, wr = _radial_factors(m, meta["nodes"])
    W = np.zeros((G["f"].shape[1], V.shape[1]))
    W[form.free_dofs] = V
    p = form.params
    terms = _piece_terms(m)
    Ak = ((1.0 - p.sigma) * _gram(G, wr, terms["F"], W) + p.sigma * _gram(G, wr, terms["Lap"], W)
          + p.alpha * _gram(G, wr, terms["L"], W))
    end_v, end_s = W[-2], W[-1]
    Ak = Ak + p.beta.finite_or(0.0) * R * np.outer(end_s, end_s) + p.gamma.finite_or(0.0) * R * np.outer(end_v, end_v)
    Bk = _gram(G, wr, terms["M"], W)
    sub = solve_gevp(PencilProblem(0.5 * (Ak + Ak.T), 0.5 * (Bk + Bk.T), want_vectors=True))
    return sub.eigenvalues[:k], V @ sub.eigenvectors[:, :k]


def radial_fem_mode(m: int, R: float, params: ParamSet, n_elems: int = 64, k: int = 0,
                    nodes: Optional[np.ndarray] = None, want_vectors: bool = False,
                    refine: bool = True) -> Spectrum:
    """Eigenvalues of the energy restricted to f(r) cos(m theta), ascending (no multiplicity)."""
    form = radial_form(m, R, params, n_elems, nodes)
    spec = solve_form(form, k, want_vectors, refine)
    spec.meta.update(m=m, method="radial_fem")
    return spec


# ---------------------------------------------------------------- root scanning


def _quart(lam):
    return math.copysign(abs(lam) ** 0.25, lam)


def _find_roots(fun, lo: float, hi: float, pitch: float, rtol: float = 1e-14) -> List[float]:
    """Sign-change scan in s = sign(l)|l|^(1/4) on [lo, hi], refined by brentq."""
    s_lo, s_hi = _quart(lo), _quart(hi)
    n = max(8, int(math.ceil((s_hi - s_lo) / pitch)))
    ss = np.linspace(s_lo, s_hi, n + 1)
    lams = np.sign(ss) * ss ** 4
    vals = [fun(float(l)) for l in lams]
    roots = []
    for i in range(n):
        a, b = float(lams[i]), float(lams[i + 1])
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0:
            xt = rtol * max(abs(a), abs(b), 1e-300)
            roots.append(brentq(fun, a, b, xtol=max(xt, 1e-300), rtol=4 * np.finfo(float).eps, maxiter=200))
    if vals[-1] == 0.0:
        roots.append(float(lams[-1]))
    return sorted(set(roots))


def mode_roots(m: int, R: float, params: ParamSet, window: Tuple[float, float],
               check_nodes: Optional[np.ndarray] = None, n_check: int = 48) -> List[float]:
    """Roots of the boundary determinant of mode m inside ``window``.

    The scan pitch resolves the spacing pi/R of consecutive roots in
    lambda^(1/4); the number of roots is cross-checked against the radial
    FEM, and the grid is refined until they agree.
    """
    lo, hi = window
    fun = lambda l: boundary_determinant(m, l, R, params)
    fem = radial_fem_mode(m, R, params, n_check, nodes=check_nodes).eigenvalues
    # FEM values are upper bounds, so the exact count in the window is at least this
    expect = int(np.sum((fem >= lo) & (fem <= hi)))
    pitch = math.pi / (16.0 * R)
    roots: List[float] = []
    for _ in range(4):
        roots = _find_roots(fun, lo, hi, pitch)
        if len(roots) >= expect:
            break
        pitch /= 4.0
    return roots


@dataclass
class ModeSolution:
    m: int
    lam: float
    R: float
    params: ParamSet
    coeffs: Tuple[float, float]
    multiplicity: int
    bc_residuals: Tuple[float, float]
    norm: float = 1.0

    def radial_profile(self, r, nder: int = 0) -> np.ndarray:
        """Derivatives 0..nder of the L2-normalized profile f at radii r (array)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros((nder + 1, len(r)))
        for i, ri in enumerate(r):
            g = _basis_values(self.m, self.params.alpha, self.lam, ri, nder)
            out[:, i] = (self.coeffs[0] * g[0] + self.coeffs[1] * g[1]) / self.norm
        return out

    def boundary_traces(self) -> np.ndarray:
        """f, f', f'', f''' at r = R (normalized)."""
        return self.radial_profile([self.R], 3)[:, 0]


def _basis_values(m, alpha, lam, r, nder):
    res = basis_derivatives(m, alpha, lam, r, nder)
    if isinstance(res, tuple):
        g, dps = res
        return np.array([[float(v) for v in row] for row in g])
    return np.asarray(res, dtype=float)


def mode_solution(m: int, lam: float, R: float, params: ParamSet) -> ModeSolution:
    """Eigenfunction of mode m at a determinant root, L2-normalized on the disk.

    The profile is scaled so that int |f cos(m theta)|^2 over the disk equals 1
    (factor 2 pi for m = 0, pi otherwise).
    """
    M, _, _, _ = _columns(m, lam, R, params)
    # null vector of the 2x2 system: the row of larger norm fixes the direction
    row = M[0] if np.linalg.norm(M[0]) >= np.linalg.norm(M[1]) else M[1]
    c = np.array([-row[1], row[0]])
    if not np.any(c):
        c = np.array([1.0, 0.0])
    # undo the column normalization used inside _columns
    g = _basis_values(m, params.alpha, lam, R, 3)
    scales = [math.sqrt(sum((g[i][j] * R ** j) ** 2 for j in range(4))) for i in range(2)]
    c = c / np.array(scales)
    c = c / np.max(np.abs(c))
    sol = ModeSolution(m, lam, R, params, (float(c[0]), float(c[1])), 1 if m == 0 else 2, (0.0, 0.0))
    rs, ws = hermite.gauss01(40)
    edges = np.linspace(0.0, R, 9)
    acc = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        rr = a + (b - a) * rs
        f = sol.radial_profile(rr, 0)[0]
        acc += np.sum(ws * (b - a) * f * f * rr)
    ang = 2 * math.pi if m == 0 else math.pi
    sol.norm = math.sqrt(acc * ang)
    fR = sol.boundary_traces()
    b1, b2 = boundary_rows(m, R, params, list(fR))
    sol.bc_residuals = (float(abs(b1)), float(abs(b2)))
    return sol


def scan_modes(R: float, params: ParamSet, m_max: int, lambda_window: Tuple[float, float]) -> Spectrum:
    """Global disk spectrum in the window from mode roots, m = 0..m_max, with multiplicity."""
    validate(Disk(R), params)
    lo, hi = lambda_window
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("window must be finite and non-empty")
    vals, modes = [], []
    truncated = False
    for m in range(m_max + 1):
        roots = mode_roots(m, R, params, (lo, hi))
        for lam in roots:
            mult = 1 if m == 0 else 2
            vals.extend([lam] * mult)
            modes.extend([m] * mult)
        if m == m_max and roots:
            truncated = True
    order = np.argsort(vals, kind="stable")
    ev = np.array(vals, dtype=float)[order]
    ms = np.array(modes, dtype=int)[order]
    meta = {"modes": ms.tolist(), "window": [lo, hi], "m_max": m_max, "truncated": truncated,
            "method": "analytic"}
    return Spectrum(ev, None, np.zeros(len(ev)), dof_count=0, meta=meta)


def fem_disk_spectrum(R: float, params: ParamSet, k: int, n_elems: int = 64,
                      nodes: Optional[np.ndarray] = None, m_cap: int = 60) -> Spectrum:
    """First k disk eigenvalues (with multiplicity) assembled from radial FEM modes."""
    vals, modes = [], []
    above = 0
    for m in range(m_cap + 1):
        ev = radial_fem_mode(m, R, params, n_elems, k=k, nodes=nodes).eigenvalues
        for lam in ev:
            mult = 1 if m == 0 else 2
            vals.extend([lam] * mult)
            modes.extend([m] * mult)
        cur = np.sort(vals)
        if len(cur) >= k and ev[0] > cur[k - 1]:
            above += 1
            if above >= 2:
                break
        else:
            above = 0
    order = np.argsort(vals, kind="stable")[:k]
    ev = np.array(vals)[order]
    return Spectrum(ev, None, None, dof_count=0,
                    meta={"modes": np.array(modes)[order].tolist(), "method": "radial_fem"})


def analytic_disk_spectrum(R: float, params: ParamSet, k: int, n_check: int = 48) -> Spectrum:
    """First k disk eigenvalues from determinant roots; window and m range from a FEM pre-pass."""
    pre = fem_disk_spectrum(R, params, k, n_check)
    top = pre.eigenvalues[-1]
    low = pre.eigenvalues[0]
    span = max(abs(top), abs(low), 1.0)
    lo = low - 0.05 * span - 1.0
    hi = top + 0.05 * span + 1.0
    m_max = max(pre.meta["modes"]) + 1
    spec = scan_modes(R, params, m_max, (lo, hi))
    ev = spec.eigenvalues[:k]
    return Spectrum(ev, None, np.zeros(len(ev)), dof_count=0,
                    meta=dict(spec.meta, modes=spec.meta["modes"][:k]))
