"""Dense symmetric-definite generalized eigensolver.

Pipeline: diagonal equilibration, Cholesky of B, congruence C = L^-1 A L^-T,
Householder reduction to tridiagonal form, implicit QL with Wilkinson-type
shifts, back-transformation.  The kernels are compiled with numba.

Semidefinite right-hand sides (Steklov and buckling pencils) are handled by
splitting off ker B and eliminating it through a Schur complement.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.linalg import solve_triangular

from .errors import (IndefiniteOnKernel, NoConvergence, NotSPD,
                     RankDetectionAmbiguous)
from .model import Spectrum

# per-eigenvalue cap; graded meshes with ~20 decades of spectral range need more than 30
MAX_QL_ITER = 60
EPS = np.finfo(float).eps
# eigenvalues of B below RANK_TOL_FACTOR * n * eps * s_max count as kernel,
# those between that and GRAY_ZONE * s_max are rejected as ambiguous
RANK_TOL_FACTOR = 1.0
GRAY_ZONE = 1e-9


class PencilKind(enum.Enum):
    STANDARD_MASS = "StandardMass"
    SEMIDEFINITE_RHS = "SemidefiniteRHS"


@dataclass
class PencilProblem:
    A: np.ndarray
    B: np.ndarray
    kind: PencilKind = PencilKind.STANDARD_MASS
    k_wanted: int = 0  # 0 means all
    tol: float = 1e-9
    want_vectors: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1] or self.A.shape != self.B.shape:
            raise ValueError(f"pencil shape mismatch {self.A.shape} vs {self.B.shape}")
        if self.k_wanted < 0:
            raise ValueError("k_wanted must be >= 0")


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _cholesky(a):
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        s = a[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if not s > 0.0:
            return L, j
        d = math.sqrt(s)
        L[j, j] = d
        for i in range(j + 1, n):
            t = a[i, j]
            for k in range(j):
                t -= L[i, k] * L[j, k]
            L[i, j] = t / d
    return L, -1


@njit(cache=True)
def _tred2(a, want_vectors):
    """Householder tridiagonalization in place (lower triangle is used).

    Returns (d, e) with e[i] the coupling between i-1 and i; when
    ``want_vectors`` the array ``a`` is overwritten by the orthogonal Q with
    Q^T A Q = tridiag(d, e).
    """
    n = a.shape[0]
    d = np.zeros(n)
    e = np.zeros(n)
    for i in range(n - 1, 0, -1):
        l = i - 1
        h = 0.0
        if l > 0:
            scale = 0.0
            for k in range(l + 1):
                scale += abs(a[i, k])
            if scale == 0.0:
                e[i] = a[i, l]
            else:
                for k in range(l + 1):
                    a[i, k] /= scale
                    h += a[i, k] * a[i, k]
                f = a[i, l]
                g = -math.sqrt(h) if f >= 0.0 else math.sqrt(h)
                e[i] = scale * g
                h -= f * g
                a[i, l] = f - g
                f = 0.0
                for j in range(l + 1):
                    if want_vectors:
                        a[j, i] = a[i, j] / h
                    g = 0.0
                    for k in range(j + 1):
                        g += a[j, k] * a[i, k]
                    for k in range(j + 1, l + 1):
                        g += a[k, j] * a[i, k]
                    e[j] = g / h
                    f += e[j] * a[i, j]
                hh = f / (h + h)
                for j in range(l + 1):
                    f = a[i, j]
                    g = e[j] - hh * f
                    e[j] = g
                    for k in range(j + 1):
                        a[j, k] -= f * e[k] + g * a[i, k]
        else:
            e[i] = a[i, l]
        d[i] = h
    d[0] = 0.0
    e[0] = 0.0
    if want_vectors:
        g_row = np.zeros(n)
        for i in range(n):
            l = i
            if d[i] != 0.0:
                # g_j = sum_k a[i,k] a[k,j]; then a[k,j] -= g_j a[k,i]
                for j in range(l):
                    g_row[j] = 0.0
                for k in range(l):
                    aik = a[i, k]
                    if aik != 0.0:
                        for j in range(l):
                            g_row[j] += aik * a[k, j]
                for k in range(l):
                    aki = a[k, i]
                    if aki != 0.0:
                        for j in range(l):
                            a[k, j] -= g_row[j] * aki
            d[i] = a[i, i]
            a[i, i] = 1.0
            for j in range(l):
                a[j, i] = 0.0
                a[i, j] = 0.0
    else:
        for i in range(n):
            d[i] = a[i, i]
    return d, e


@njit(cache=True)
def _tqli(d, e, zt, want_vectors, max_iter=30):
    """Implicit QL on tridiag(d, e); rows of ``zt`` are rotated (zt = Q^T on entry).

    Returns 0 on success, or 1 + index of the eigenvalue that failed to converge.
    """
    n = d.shape[0]
    for i in range(1, n):
        e[i - 1] = e[i]
    if n > 0:
        e[n - 1] = 0.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.220446049250313e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return l + 1
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            early = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    early = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_vectors:
                    for k in range(zt.shape[1]):
                        f = zt[i + 1, k]
                        zt[i + 1, k] = s * zt[i, k] + c * f
                        zt[i, k] = c * zt[i, k] - s * f
                i -= 1
            if early:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


# ---------------------------------------------------------------- public API


def cholesky(B: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raises NotSPD with the failing pivot."""
    L, fail = _cholesky(np.ascontiguousarray(B, dtype=float))
    if fail >= 0:
        raise NotSPD(f"Cholesky breakdown at pivot {fail}")
    return L


def symmetric_eig(C: np.ndarray, want_vectors: bool = True):
    """Eigen-decomposition of a symmetric matrix, ascending.  Vectors are columns."""
    n = C.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    a = np.array(0.5 * (C + C.T), dtype=float, order="C")
    d, e = _tred2(a, want_vectors)
    zt = np.ascontiguousarray(a.T) if want_vectors else np.zeros((1, 1))
    fail = _tqli(d, e, zt, want_vectors, MAX_QL_ITER)
    if fail:
        raise NoConvergence(f"QL iteration cap ({MAX_QL_ITER}) hit at eigenvalue {fail - 1}")
    order = np.argsort(d, kind="stable")
    w = d[order]
    if not want_vectors:
        return w, None
    return w, zt[order].T.copy()


def _equilibrate(M: np.ndarray) -> np.ndarray:
    dg = np.abs(np.diag(M)).copy()
    dg[dg == 0] = 1.0
    return 1.0 / np.sqrt(dg)


def solve_gevp(p: PencilProblem) -> Spectrum:
    """Sorted eigenpairs of A v = lambda B v for B symmetric positive definite."""
    A, B = p.A, p.B
    n = A.shape[0]
    if n == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0)), np.zeros(0), dof_count=0)
    D = _equilibrate(B)
    As = A * D[:, None] * D[None, :]
    Bs = B * D[:, None] * D[None, :]
    L = cholesky(0.5 * (Bs + Bs.T))
    X = solve_triangular(L, 0.5 * (As + As.T), lower=True)
    C = solve_triangular(L, X.T, lower=True)
    w, Y = symmetric_eig(C, p.want_vectors)
    k = n if p.k_wanted in (0, None) else min(p.k_wanted, n)
    w = w[:k]
    if not p.want_vectors:
        return Spectrum(w, None, None, dof_count=n, meta=dict(p.meta))
    V = solve_triangular(L.T, Y[:, :k], lower=False) * D[:, None]
    R = A @ V - (B @ V) * w[None, :]
    res = np.linalg.norm(R, axis=0)
    return Spectrum(w, V, res, dof_count=n, meta=dict(p.meta))


def _kernel_split(B: np.ndarray):
    """Orthonormal range/kernel bases of a symmetric PSD matrix plus range eigenvalues."""
    n = B.shape[0]
    s, U = symmetric_eig(B, True)
    smax = float(np.max(np.abs(s))) if n else 0.0
    if smax == 0.0:
        raise RankDetectionAmbiguous("right-hand matrix is zero")
    tol = RANK_TOL_FACTOR * n * EPS * smax
    if np.any(s < -max(tol, 1e-12 * smax)):
        raise RankDetectionAmbiguous("right-hand matrix has negative eigenvalues")
    gray = (s > tol) & (s < GRAY_ZONE * smax)
    if np.any(gray):
        raise RankDetectionAmbiguous(f"{int(gray.sum())} singular values in the gray zone")
    rng = s >= GRAY_ZONE * smax
    return U[:, rng], U[:, ~rng], s[rng]


def solve_semidefinite_pencil(p: PencilProblem) -> Spectrum:
    """Finite eigenvalues of A x = eta B x with B only positive semi-definite.

    Writing x = R b + N c with N spanning ker B, the rows along N force
    c = -(N^T A N)^-1 N^T A R b, leaving the definite pencil
    (Schur complement, diag(s)).  Directions in ker A and ker B together
    carry no eigenvalue and are discarded.
    """
    A = 0.5 * (p.A + p.A.T)
    B = 0.5 * (p.B + p.B.T)
    n = A.shape[0]
    Dg = _equilibrate(A)
    As = A * Dg[:, None] * Dg[None, :]
    Bs = B * Dg[:, None] * Dg[None, :]
    Rb, Nb, s = _kernel_split(Bs)
    dropped = 0
    if Nb.shape[1]:
        Ann = Nb.T @ As @ Nb
        mu, Z = symmetric_eig(Ann, True)
        scale = max(float(np.max(np.abs(np.diag(As)))), 1e-300)
        ztol = 1e-10 * scale
        if np.any(mu < -ztol):
            raise IndefiniteOnKernel(f"A has negative curvature {mu[0]:.3e} on ker B")
        small = mu <= ztol
        if np.any(small):
            Zs = Nb @ Z[:, small]
            if np.max(np.abs(As @ Zs)) > 1e-8 * scale:
                raise IndefiniteOnKernel("A is singular on ker B but not on the whole space")
            dropped = int(small.sum())
            Nb = Nb @ Z[:, ~small]
            Ann = Nb.T @ As @ Nb
        Anr = Nb.T @ As @ Rb
        X = np.linalg.solve(Ann, Anr) if Nb.shape[1] else np.zeros((0, Rb.shape[1]))
        S = Rb.T @ As @ Rb - Anr.T @ X
    else:
        X = np.zeros((0, Rb.shape[1]))
        S = Rb.T @ As @ Rb
    sub = PencilProblem(S, np.diag(s), k_wanted=p.k_wanted, want_vectors=True, meta=dict(p.meta))
    spec = solve_gevp(sub)
    Bvec = Rb @ spec.eigenvectors - (Nb @ (X @ spec.eigenvectors) if Nb.shape[1] else 0.0)
    V = Bvec * Dg[:, None]
    res = np.linalg.norm(A @ V - (B @ V) * spec.eigenvalues[None, :], axis=0)
    meta = dict(p.meta)
    meta.update(kernel_dim=n - len(s), common_kernel_dim=dropped, finite_count=len(s))
    return Spectrum(spec.eigenvalues, V if p.want_vectors else None, res, dof_count=n, meta=meta)


def solve(p: PencilProblem) -> Spectrum:
    if p.kind is PencilKind.SEMIDEFINITE_RHS:
        return solve_semidefinite_pencil(p)
    return solve_gevp(p)


def eigvals(A, B, k: int = 0) -> np.ndarray:
    """Shorthand: ascending eigenvalues of (A, B), B SPD, no vectors."""
    return solve_gevp(PencilProblem(A, B, k_wanted=k, want_vectors=False)).eigenvalues


# ---------------------------------------------------------------- oracle


def inertia_count(A, B, mu: float) -> int:
    """Number of eigenvalues of (A, B) strictly below mu (Sylvester's law of inertia)."""
    from scipy.linalg import ldl

    _, Dm, _ = ldl(A - mu * B, lower=True)
    neg = 0
    i = 0
    n = Dm.shape[0]
    while i < n:
        if i + 1 < n and Dm[i + 1, i] != 0.0:
            ev = np.linalg.eigvalsh(Dm[i:i + 2, i:i + 2])
            neg += int(np.sum(ev < 0))
            i += 2
        else:
            neg += int(Dm[i, i] < 0)
            i += 1
    return neg


def bisection_eigenvalues(A, B, rtol: float = 1e-13) -> np.ndarray:
    """Brute-force oracle: every eigenvalue located by bisection on inertia counts."""
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    n = A.shape[0]
    Linv = np.linalg.inv(np.linalg.cholesky(B))
    bound = np.linalg.norm(Linv @ A @ Linv.T, 1) * 1.01 + 1.0
    out = np.empty(n)
    for k in range(n):
        lo, hi = -bound, bound
        while hi - lo > rtol * max(1.0, abs(lo), abs(hi)):
            mid = 0.5 * (lo + hi)
            if inertia_count(A, B, mid) > k:
                hi = mid
            else:
                lo = mid
        out[k] = 0.5 * (lo + hi)
    return out
