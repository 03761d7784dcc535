"""Closed-form and transcendental reference values.

These are deliberately computed with tools independent of the solvers they
check (scipy special functions, brentq on characteristic equations).
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.optimize import brentq


@lru_cache(maxsize=None)
def clamped_beam_k(k: int) -> float:
    """k-th positive root of cos(x) cosh(x) = 1 (clamped-clamped beam)."""
    f = lambda x: math.cos(x) * math.cosh(x) - 1.0 if x < 20 else math.cos(x) - 1.0 / math.cosh(x)
    centre = (k + 0.5) * math.pi
    return brentq(f, centre - 0.5, centre + 0.5, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def clamped_beam_lambda(k: int, L: float = 1.0) -> float:
    return (clamped_beam_k(k) / L) ** 4


def hinged_beam_lambda(k: int, L: float = 1.0) -> float:
    return (k * math.pi / L) ** 4


def free_beam_lambda(k: int, L: float = 1.0) -> float:
    """Free-free beam: two zero modes, then the clamped values."""
    return 0.0 if k <= 2 else clamped_beam_lambda(k - 2, L)


@lru_cache(maxsize=None)
def clamped_disk_k(R: float = 1.0) -> float:
    """First root of J0(x) I1(x) + I0(x) J1(x) = 0 scaled by R."""
    f = lambda x: special.j0(x) * special.i1(x) + special.i0(x) * special.j1(x)
    return brentq(f, 2.5, 3.5, xtol=1e-15) / R


def clamped_disk_lambda(R: float = 1.0) -> float:
    return clamped_disk_k(R) ** 4


def buckling_clamped_column(k: int = 1, L: float = 1.0) -> float:
    """First buckling load of u'''' = -Lambda u'' with u = u' = 0 at both ends."""
    if k != 1:
        raise ValueError("only the first clamped-column load is tabulated")
    return (2 * math.pi / L) ** 2


# ---------------------------------------------------------------- Laplacian on (0, L)


def dirichlet_laplacian_1d(k: int, L: float = 1.0) -> float:
    return (k * math.pi / L) ** 2


def neumann_laplacian_1d(k: int, L: float = 1.0) -> float:
    return ((k - 1) * math.pi / L) ** 2


def robin_characteristic(mu: float, g: float, L: float = 1.0) -> float:
    """Entire function F(mu) = (mu - g^2) S(mu) - 2 g C(mu) whose zeros are the
    eigenvalues of -v'' = mu v, v'(n) + g v = 0 at both ends of (0, L).

    S = sin(sqrt(mu) L)/sqrt(mu), C = cos(sqrt(mu) L) (hyperbolic for mu < 0).
    """
    if mu > 0:
        k = math.sqrt(mu)
        S, C = math.sin(k * L) / k, math.cos(k * L)
    elif mu < 0:
        k = math.sqrt(-mu)
        # scale out cosh to keep the function finite; the sign is unchanged
        S, C = math.tanh(k * L) / k, 1.0
    else:
        S, C = L, 1.0
    return (mu - g * g) * S - 2.0 * g * C


def robin_laplacian_1d(k: int, g: float, L: float = 1.0) -> float:
    """k-th Robin Laplacian eigenvalue on (0, L) by bracketing the characteristic function."""
    roots = []
    lo = -(abs(g) * 2 + 1.0) ** 2 * 4 if g < 0 else 0.0
    hi = dirichlet_laplacian_1d(k + 1, L) + 1.0
    grid = np.concatenate([np.linspace(lo, 0.0, 400, endpoint=False),
                           np.linspace(0.0, math.sqrt(hi), 4000) ** 2])
    grid = np.unique(grid)
    vals = [robin_characteristic(x, g, L) for x in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(robin_characteristic, a, b, args=(g, L), xtol=1e-14, rtol=1e-15))
    roots = sorted(set(roots))
    if len(roots) < k:
        raise ValueError("Robin oracle bracket too small")
    return roots[k - 1]


# ---------------------------------------------------------------- Laplacian on the disk


def _disk_mode_list(kmax: int, R: float, fn):
    vals = []
    for m in range(0, kmax + 2):
        for z in fn(m, kmax):
            vals.extend([z] * (1 if m == 0 else 2))
    return np.sort(np.array(vals))[:kmax]


def dirichlet_laplacian_disk(k: int, R: float = 1.0) -> float:
    vals = _disk_mode_list(k, R, lambda m, n: (special.jn_zeros(m, n) / R) ** 2)
    return float(vals[k - 1])


def neumann_laplacian_disk(k: int, R: float = 1.0) -> float:
    def zeros(m, n):
        z = list(special.jnp_zeros(m, n)) if m > 0 else [0.0] + list(special.jnp_zeros(0, n - 1 if n > 1 else 1))
        return (np.array(z[:n]) / R) ** 2

    vals = _disk_mode_list(k, R, zeros)
    return float(vals[k - 1])


def robin_laplacian_disk(k: int, g: float, R: float = 1.0) -> float:
    """Eigenvalues of -Lap v = mu v with d_nu v + g v = 0 on the disk (g >= 0)."""
    if g < 0:
        raise ValueError("disk Robin oracle implemented for g >= 0")
    vals = []
    for m in range(0, k + 2):
        f = lambda x, m=m: x * special.jvp(m, x * R) + g * special.jv(m, x * R)
        xs = np.linspace(1e-9, (k + m + 3) * math.pi / R, 4000)
        fx = f(xs)
        for a, b, fa, fb in zip(xs[:-1], xs[1:], fx[:-1], fx[1:]):
            if fa * fb < 0:
                z = brentq(f, a, b, xtol=1e-15)
                vals.extend([z * z] * (1 if m == 0 else 2))
        if g == 0 and m == 0:
            vals.append(0.0)
    return float(np.sort(vals)[k - 1])
