"""C1 Hermite cubic discretization of the Robin form on an interval."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from . import hermite
from .errors import ZeroVector
from .model import BoundaryRegime, Interval, ParamSet, regime_of, validate


@dataclass(frozen=True)
class DiscreteForm:
    """Energy matrix A, mass B and the pencil pieces, restricted to ``free_dofs``.

    ``full`` keeps the unconstrained matrices, ``P`` (principal part), ``L``
    (gradient stiffness), ``T`` (boundary normal-derivative mass) and ``Mb``
    (boundary trace mass), so that regimes and parameters can be changed on
    the same mesh without re-integrating.
    """

    A: np.ndarray
    B: np.ndarray
    aux: Dict[str, np.ndarray]
    free_dofs: np.ndarray
    basis_meta: dict
    params: ParamSet
    full: Dict[str, np.ndarray] = field(repr=False, default_factory=dict)

    @property
    def n_free(self) -> int:
        return len(self.free_dofs)

    @property
    def mesh_size(self) -> float:
        return float(self.basis_meta.get("h_max", np.nan))

    def with_params(self, params: ParamSet) -> "DiscreteForm":
        """Same mesh, new (alpha, beta, gamma); regime follows the new parameters."""
        return build_form(self.full, self.basis_meta, params)

    def expand(self, v: np.ndarray) -> np.ndarray:
        """Coefficient vector on free dofs -> full dof vector (constrained entries 0)."""
        out = np.zeros(self.full["M"].shape[0] if "M" in self.full else len(v))
        out[self.free_dofs] = v
        return out


def constrained_dofs_1d(n_nodes: int, regime: BoundaryRegime) -> np.ndarray:
    ends = (0, n_nodes - 1)
    out = []
    for i in ends:
        if regime.clamps_value:
            out.append(2 * i)
        if regime.clamps_normal:
            out.append(2 * i + 1)
    return np.array(sorted(out), dtype=int)


def principal(full: Dict[str, np.ndarray], sigma: float) -> np.ndarray:
    """Second-order part (1 - sigma) D2:D2 + sigma Lap Lap; 1-D forms store it directly."""
    if "F" in full:
        return (1.0 - sigma) * full["F"] + sigma * full["Lap"]
    return full["P"]


def build_form(full: Dict[str, np.ndarray], meta: dict, params: ParamSet) -> DiscreteForm:
    """Combine the stored pieces into A and restrict to the regime's free dofs."""
    regime = regime_of(params)
    P = principal(full, params.sigma)
    A_full = P + params.alpha * full["L"]
    # a parameter equal to +inf is realized by the constraint, its weight is 0
    A_full = A_full + params.beta.finite_or(0.0) * full["T"] + params.gamma.finite_or(0.0) * full["Mb"]
    ndof = A_full.shape[0]
    fixed = meta["constrained"][regime.value]
    mask = np.ones(ndof, dtype=bool)
    mask[fixed] = False
    free = np.nonzero(mask)[0]
    ix = np.ix_(free, free)
    aux = {"P": P[ix], "L": full["L"][ix], "T": full["T"][ix], "Mb": full["Mb"][ix]}
    A = A_full[ix]
    A = 0.5 * (A + A.T)
    return DiscreteForm(A, full["M"][ix], aux, free, dict(meta, regime=regime.value), params, full)


def global_matrices_1d(nodes: np.ndarray, kinds=("M", "K1", "K2", "C")) -> dict:
    """Assemble the global 1-D Hermite matrices on ``nodes`` (dof 2i = value, 2i+1 = slope)."""
    nodes = np.asarray(nodes, dtype=float)
    h = np.diff(nodes)
    ne = len(h)
    ndof = 2 * (ne + 1)
    loc = hermite.element_matrices(h, kinds)
    idx = 2 * np.arange(ne)[:, None] + np.arange(4)[None, :]
    rows = np.broadcast_to(idx[:, :, None], (ne, 4, 4))
    cols = np.broadcast_to(idx[:, None, :], (ne, 4, 4))
    out = {}
    for kind in kinds:
        G = np.zeros((ndof, ndof))
        np.add.at(G, (rows, cols), loc[kind])
        out[kind] = G
    # endpoint point masses: slope dofs for T, value dofs for Mb
    T1 = np.zeros((ndof, ndof))
    V1 = np.zeros((ndof, ndof))
    T1[1, 1] = T1[ndof - 1, ndof - 1] = 1.0
    V1[0, 0] = V1[ndof - 2, ndof - 2] = 1.0
    out["T1"] = T1
    out["V1"] = V1
    return out


def make_nodes(domain: Interval, n_elems: int, grading: Optional[float] = None,
               h_layer: Optional[float] = None) -> np.ndarray:
    if grading is None:
        return hermite.uniform_nodes(domain.a, domain.b, n_elems)
    return hermite.graded_nodes(domain.a, domain.b, n_elems, grading, h_layer=h_layer)


def assemble_interval(domain: Interval, params: ParamSet, n_elems: int = 64,
                      nodes: Optional[np.ndarray] = None, grading: Optional[float] = None) -> DiscreteForm:
    """Discrete form for the interval.  ``grading`` is a boundary-layer width for a graded mesh."""
    validate(domain, params)
    if nodes is None:
        if n_elems < 2:
            raise ValueError("n_elems must be >= 2")
        nodes = make_nodes(domain, n_elems, grading)
    nodes = np.asarray(nodes, dtype=float)
    G = global_matrices_1d(nodes, ("M", "K1", "K2"))
    # in 1-D the Hessian and Laplacian terms coincide, so sigma drops out
    full = {"P": G["K2"], "L": G["K1"], "T": G["T1"], "Mb": G["V1"], "M": G["M"]}
    nn = len(nodes)
    meta = {
        "kind": "interval",
        "nodes": nodes,
        "dof_roles": ("u", "u_x"),
        "n_nodes": nn,
        "h_max": float(np.max(np.diff(nodes))),
        "h_min": float(np.min(np.diff(nodes))),
        "constrained": {r.value: constrained_dofs_1d(nn, r) for r in BoundaryRegime},
    }
    return build_form(full, meta, params)


def apply_regime(form: DiscreteForm, regime: BoundaryRegime) -> DiscreteForm:
    """Re-restrict ``form`` to the dofs of ``regime``; finite boundary weights are kept.

    Parameters that the regime sends to +inf are replaced; the remaining ones
    keep their finite values (a finite placeholder 0 if they were +inf).
    """
    p = form.params
    beta = p.beta if not p.beta.infinite else 0.0
    gamma = p.gamma if not p.gamma.infinite else 0.0
    if regime.clamps_normal:
        beta = float("inf")
    if regime.clamps_value:
        gamma = float("inf")
    return form.with_params(p.replace(beta=beta, gamma=gamma))


def rayleigh(form: DiscreteForm, v: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    den = float(v @ form.B @ v)
    if not np.any(v) or den <= 0.0:
        raise ZeroVector("Rayleigh quotient of the zero vector")
    return float(v @ form.A @ v) / den


def interpolate(form: DiscreteForm, f, df) -> np.ndarray:
    """Hermite interpolant (values and slopes at nodes) restricted to the free dofs."""
    x = form.basis_meta["nodes"]
    full = np.empty(2 * len(x))
    full[0::2] = f(x)
    full[1::2] = df(x)
    return full[form.free_dofs]


def evaluate(form: DiscreteForm, v: np.ndarray, x: np.ndarray, deriv: int = 0) -> np.ndarray:
    """Evaluate the discrete function (free-dof vector ``v``) or a derivative at points ``x``."""
    nodes = form.basis_meta["nodes"]
    c = form.expand(v)
    x = np.asarray(x, dtype=float)
    e = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, len(nodes) - 2)
    h = nodes[e + 1] - nodes[e]
    s = (x - nodes[e]) / h
    N = hermite.shape(s, h)[deriv]  # (4, npts)
    coef = np.stack([c[2 * e], c[2 * e + 1], c[2 * e + 2], c[2 * e + 3]])
    return np.sum(N * coef, axis=0)


def _factors_1d(nodes: np.ndarray):
    """Gauss-point evaluation matrices of f, f', f'' (4 points: exact for the mass)."""
    h = np.diff(nodes)
    ne = len(h)
    s, w = hermite.gauss01(4)
    nq = len(s)
    N = hermite.shape(s[None, :], h[:, None])
    rows = np.arange(ne)[:, None] * nq + np.arange(nq)[None, :]
    G = []
    for d in range(3):
        Gd = np.zeros((ne * nq, 2 * (ne + 1)))
        for i in range(4):
            Gd[rows, 2 * np.arange(ne)[:, None] + i] = N[d, i]
        G.append(Gd)
    return G, (w[None, :] * h[:, None]).ravel()


def ritz_refine_1d(form: DiscreteForm, V: np.ndarray, k: int):
    """Rayleigh-Ritz on span(V) with energy and mass rebuilt from Gauss-point values.

    Keeps small eigenvalues at discretization accuracy on fine meshes, where the
    assembled matrices carry rounding of order eps * lambda_max.
    """
    from .eigsolve import PencilProblem, solve_gevp

    G, w = _factors_1d(form.basis_meta["nodes"])
    W = np.zeros((G[0].shape[1], V.shape[1]))
    W[form.free_dofs] = V
    X = [g @ W for g in G]
    gram = lambda Y: Y.T @ (Y * w[:, None])
    p = form.params
    Ak = gram(X[2]) + p.alpha * gram(X[1])
    b, g = p.beta.finite_or(0.0), p.gamma.finite_or(0.0)
    Ak = Ak + b * (np.outer(W[1], W[1]) + np.outer(W[-1], W[-1]))
    Ak = Ak + g * (np.outer(W[0], W[0]) + np.outer(W[-2], W[-2]))
    Bk = gram(X[0])
    sub = solve_gevp(PencilProblem(0.5 * (Ak + Ak.T), 0.5 * (Bk + Bk.T)))
    return sub.eigenvalues[:k], V @ sub.eigenvectors[:, :k]


def solve_form(form: DiscreteForm, k: int = 0, want_vectors: bool = False, refine: bool = True):
    """Lowest k eigenpairs of (A, B); interval and radial forms get a Ritz refinement."""
    from .eigsolve import PencilProblem, solve_gevp
    from .model import Spectrum

    n = form.n_free
    kk = n if k in (0, None) else min(n, k)
    kind = form.basis_meta.get("kind")
    if refine and kind in ("interval", "radial"):
        extra = min(n, kk + 4)
        spec = solve_gevp(PencilProblem(form.A, form.B, k_wanted=extra, want_vectors=True))
        if kind == "interval":
            lam, V = ritz_refine_1d(form, spec.eigenvectors, kk)
        else:
            from .diskpolar import ritz_refine

            lam, V = ritz_refine(form, spec.eigenvectors, kk)
        res = np.linalg.norm(form.A @ V - (form.B @ V) * lam[None, :], axis=0)
        out = Spectrum(lam, V if want_vectors else None, res, dof_count=n)
    else:
        out = solve_gevp(PencilProblem(form.A, form.B, k_wanted=kk, want_vectors=want_vectors))
    out.mesh_size = form.mesh_size
    out.meta.update(regime=form.basis_meta.get("regime"), kind=kind)
    return out
