"""Cubic Hermite shape functions, Gauss rules and 1-D meshes."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss01(npts: int):
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


def npts_exact(degree: int) -> int:
    # an n-point Gauss rule integrates degree 2n-1 exactly
    return max(1, math.ceil((degree + 1) / 2))


def shape(s, h):
    """Values and first three x-derivatives of the four Hermite functions.

    ``s`` is the reference coordinate in [0, 1] (any shape), ``h`` the element
    length (broadcastable against ``s``).  Returns an array of shape
    (4 derivatives, 4 functions, *s.shape).  Ordering of the functions is
    (value left, slope left, value right, slope right).
    """
    s = np.asarray(s, dtype=float)
    h = np.asarray(h, dtype=float)
    s2, s3 = s * s, s * s * s
    one = np.ones_like(s + h)
    N = np.empty((4, 4) + np.broadcast(s, h).shape)
    N[0, 0] = 1 - 3 * s2 + 2 * s3
    N[0, 1] = h * (s - 2 * s2 + s3)
    N[0, 2] = 3 * s2 - 2 * s3
    N[0, 3] = h * (-s2 + s3)
    N[1, 0] = (-6 * s + 6 * s2) / h
    N[1, 1] = 1 - 4 * s + 3 * s2
    N[1, 2] = (6 * s - 6 * s2) / h
    N[1, 3] = -2 * s + 3 * s2
    N[2, 0] = (-6 + 12 * s) / h ** 2
    N[2, 1] = (-4 + 6 * s) / h
    N[2, 2] = (6 - 12 * s) / h ** 2
    N[2, 3] = (-2 + 6 * s) / h
    N[3, 0] = 12 / h ** 3 * one
    N[3, 1] = 6 / h ** 2 * one
    N[3, 2] = -12 / h ** 3 * one
    N[3, 3] = 6 / h ** 2 * one
    return N


def element_matrices(h: np.ndarray, kinds=("M", "K1", "K2", "C")) -> dict:
    """Element integrals for every element length in ``h``; each has shape (ne, 4, 4).

    M = int N_i N_j, K1 = int N_i' N_j', K2 = int N_i'' N_j'', C = int N_i'' N_j.
    """
    h = np.asarray(h, dtype=float)
    spec = {"M": (0, 0, 6), "K1": (1, 1, 4), "K2": (2, 2, 2), "C": (2, 0, 4)}
    out = {}
    for kind in kinds:
        da, db, deg = spec[kind]
        s, w = gauss01(npts_exact(deg))
        N = shape(s[None, :], h[:, None])  # (4, 4, ne, q)
        Na, Nb = N[da], N[db]
        out[kind] = np.einsum("ieq,jeq,q,e->eij", Na, Nb, w, h)
    return out


def uniform_nodes(a: float, b: float, n: int) -> np.ndarray:
    return np.linspace(a, b, n + 1)


def graded_nodes(a: float, b: float, n: int, scale: float, ratio: float = 1.15,
                 h_layer: float | None = None, left: bool = True, right: bool = True) -> np.ndarray:
    """Nodes on [a, b] refined geometrically toward the chosen endpoints.

    ``scale`` is the boundary-layer width.  Elements grow from ``h_layer``
    (default scale/8) by ``ratio`` until they reach the interior size L/n,
    which is then used uniformly.
    """
    L = b - a
    h_int = L / n
    h0 = scale / 8.0 if h_layer is None else h_layer
    if h0 >= h_int or not (left or right):
        return uniform_nodes(a, b, n)
    steps = [h0]
    cap = (0.45 if left and right else 0.9) * L
    while steps[-1] * ratio < h_int and sum(steps) + steps[-1] * ratio < cap:
        steps.append(steps[-1] * ratio)
    layer = np.cumsum(steps)
    width = layer[-1]
    lo = a + width if left else a
    hi = b - width if right else b
    m = max(1, int(math.ceil((hi - lo) / h_int)))
    parts = []
    if left:
        parts.append(a + np.concatenate([[0.0], layer[:-1]]))
    parts.append(np.linspace(lo, hi, m + 1))
    if right:
        parts.append(b - np.concatenate([layer[:-1][::-1], [0.0]]))
    return np.concatenate(parts)
