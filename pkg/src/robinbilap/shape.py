"""Hadamard shape derivatives of eigenvalue clusters on the disk.

Boundary traces of each eigenfunction are sampled on a uniform theta-grid,
so every boundary integral is a trapezoid sum (spectrally accurate for the
trigonometric integrands produced by Fourier modes).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .diskpolar import analytic_disk_spectrum, mode_roots, mode_solution
from .errors import IncompleteCluster, MissingTraceOrder, RegimeUnsupported
from .model import BoundaryRegime, Disk, ParamSet, regime_of

N_THETA = 256
CLUSTER_RTOL = 1e-8

TRACE_KEYS = ("v", "v_nu", "v_nunu", "lap", "grad", "D2", "grad_v_nu")


def theta_grid(n: int = N_THETA) -> np.ndarray:
    return 2.0 * math.pi * np.arange(n) / n


def mode_traces(sol, trig: str = "cos", n: int = N_THETA) -> Dict[str, np.ndarray]:
    """Boundary traces of f(r) cos(m theta) (or sin) at r = R.

    Vectors are given in the (normal, tangential) frame; ``D2`` holds the
    polar Hessian components (rr, r-theta, theta-theta).  ``grad_v_nu`` is
    the gradient of d_r v, whose normal part is v_nunu.
    """
    m, R = sol.m, sol.R
    f0, f1, f2, _ = sol.boundary_traces()
    th = theta_grid(n)
    if trig == "cos":
        c, d = np.cos(m * th), -np.sin(m * th)
    elif trig == "sin":
        c, d = np.sin(m * th), np.cos(m * th)
    else:
        raise ValueError(f"trig must be cos or sin, got {trig!r}")
    e_rr = f2 * c
    e_rt = m * (f1 / R - f0 / R ** 2) * d
    e_tt = (f1 / R - m * m * f0 / R ** 2) * c
    return {
        "v": f0 * c,
        "v_nu": f1 * c,
        "v_nunu": f2 * c,
        "lap": e_rr + e_tt,
        "grad": np.array([f1 * c, m * f0 / R * d]),
        "D2": np.array([e_rr, e_rt, e_tt]),
        "grad_v_nu": np.array([f2 * c, m * f1 / R * d]),
    }


def _need(tr: dict, keys):
    missing = [k for k in keys if k not in tr]
    if missing:
        raise MissingTraceOrder(f"traces missing: {missing}")


def eval_G(traces: Dict[str, np.ndarray], params: ParamSet, K: Union[float, np.ndarray],
           lam: Optional[float] = None, variant: str = "corrected") -> np.ndarray:
    """Boundary density G(v) of the shape derivative.

    ``variant="corrected"`` (default) is the density whose boundary integral
    against zeta.nu gives the eigenvalue derivative:

        (1-s)|D2v|^2 + s(Lap v)^2 + a|grad v|^2 - lam v^2
        + 2b v_nu Lap v + 2b grad_T v_nu . grad_T v - b K v_nu^2
        + g K v^2 + 2g v v_nu

    with grad_T the tangential gradient.  ``variant="printed"`` keeps the
    literature form: no mass term, full gradients in the b-product and an
    extra -b v_nu v_nunu.  Only the corrected variant agrees with re-solving
    on dilated disks.
    """
    if regime_of(params) is not BoundaryRegime.FULL_ROBIN:
        # with a prescribed trace the eigenfunction's shape derivative no longer drops out
        raise RegimeUnsupported("the boundary density is derived for the FullRobin form domain")
    s, a = params.sigma, params.alpha
    b, g = params.beta.value, params.gamma.value
    need = ["D2", "lap", "grad"]
    if b != 0.0:
        need += ["v_nu", "grad_v_nu"] + (["v_nunu"] if variant == "printed" else [])
    if g != 0.0:
        need += ["v", "v_nu"]
    if variant == "corrected":
        need += ["v"]
    _need(traces, need)
    D2 = traces["D2"]
    frob = D2[0] ** 2 + 2.0 * D2[1] ** 2 + D2[2] ** 2
    lap = traces["lap"]
    grad = traces["grad"]
    G = (1.0 - s) * frob + s * lap ** 2 + a * (grad[0] ** 2 + grad[1] ** 2)
    if b != 0.0:
        vn, gvn = traces["v_nu"], traces["grad_v_nu"]
        if variant == "corrected":
            G = G + 2 * b * vn * lap + 2 * b * gvn[1] * grad[1] - b * K * vn ** 2
        elif variant == "printed":
            G = (G + 2 * b * vn * lap + 2 * b * (gvn[0] * grad[0] + gvn[1] * grad[1])
                 - b * K * vn ** 2 - b * vn * traces["v_nunu"])
        else:
            raise ValueError(f"unknown variant {variant!r}")
    if g != 0.0:
        G = G + g * K * traces["v"] ** 2 + 2 * g * traces["v"] * traces["v_nu"]
    if variant == "corrected":
        if lam is None:
            raise ValueError("the corrected density needs the eigenvalue")
        G = G - lam * traces["v"] ** 2
    return np.asarray(G, dtype=float)


@dataclass
class Cluster:
    """Eigenvalues lambda_F (indices F, 1-based) with an L2-orthonormal eigenbasis on the disk."""

    F: List[int]
    lambda_F: float
    R: float
    params: ParamSet
    eigenbasis: List[Dict[str, np.ndarray]]
    modes: List[tuple] = field(default_factory=list)
    complete: bool = True

    @property
    def size(self) -> int:
        return len(self.eigenbasis)

    @property
    def K(self) -> float:
        return 1.0 / self.R

    def truncate(self, keep: Sequence[int]) -> "Cluster":
        keep = list(keep)
        return replace(self, eigenbasis=[self.eigenbasis[i] for i in keep],
                       modes=[self.modes[i] for i in keep] if self.modes else [],
                       F=self.F[: len(keep)], complete=len(keep) == self.size and self.complete)

    def densities(self, variant: str = "corrected") -> np.ndarray:
        return np.array([eval_G(tr, self.params, self.K, self.lambda_F, variant) for tr in self.eigenbasis])


def _refine_root(m, R, params, guess):
    w = 1e-6 * (1.0 + abs(guess)) + 1e-9
    for _ in range(6):
        roots = mode_roots(m, R, params, (guess - w, guess + w))
        if roots:
            return min(roots, key=lambda x: abs(x - guess))
        w *= 10.0
    return guess


def disk_cluster(R: float, params: ParamSet, k: int, n_theta: int = N_THETA) -> Cluster:
    """Complete cluster containing the k-th disk eigenvalue.

    Grouping uses the exact mode multiplicities (1 for m = 0, 2 otherwise)
    and merges different modes only when their eigenvalues agree within
    CLUSTER_RTOL (1 + |lambda|).
    """
    if regime_of(params) is not BoundaryRegime.FULL_ROBIN:
        raise RegimeUnsupported("shape derivatives are implemented for FullRobin parameters")
    extra = k + 4
    spec = analytic_disk_spectrum(R, params, extra)
    ev = spec.eigenvalues
    ms = spec.meta["modes"]
    lam_k = ev[k - 1]
    tol = CLUSTER_RTOL * (1.0 + abs(lam_k))
    idx = [i for i in range(len(ev)) if abs(ev[i] - lam_k) <= tol]
    basis, modes = [], []
    seen = set()
    for i in idx:
        m = ms[i]
        if m in seen:
            continue
        seen.add(m)
        sol = mode_solution(m, _refine_root(m, R, params, ev[i]), R, params)
        basis.append(mode_traces(sol, "cos", n_theta))
        modes.append((m, "cos"))
        if m > 0:
            basis.append(mode_traces(sol, "sin", n_theta))
            modes.append((m, "sin"))
    F = [i + 1 for i in idx]
    lamF = float(np.mean(ev[idx]))
    return Cluster(F, lamF, R, params, basis, modes, complete=len(F) == len(basis))


def boundary_integral(samples: np.ndarray, R: float) -> float:
    """Trapezoid rule for the integral over the circle of radius R (uniform periodic grid)."""
    samples = np.asarray(samples, dtype=float)
    return float(np.mean(samples, axis=-1).sum() * 2.0 * math.pi * R) if samples.ndim > 1 else \
        float(np.mean(samples) * 2.0 * math.pi * R)


def _field_samples(fieldv, n):
    if callable(fieldv):
        return np.asarray(fieldv(theta_grid(n)), dtype=float) * np.ones(n)
    arr = np.asarray(fieldv, dtype=float)
    return arr * np.ones(n) if arr.ndim == 0 else arr


def hadamard_derivative(cluster: Cluster, s: int, field_samples: Union[np.ndarray, Callable, float],
                        variant: str = "corrected") -> float:
    """Differential of the s-th elementary symmetric function of the cluster eigenvalues.

    lambda_F^(s-1) binom(|F|-1, s-1) sum_l int G(v_l) zeta.nu over the circle.
    """
    n_F = cluster.size
    if not 1 <= s <= n_F:
        raise ValueError(f"s must lie in 1..{n_F}")
    G = cluster.densities(variant)
    z = _field_samples(field_samples, G.shape[1])
    total = boundary_integral(G.sum(axis=0) * z, cluster.R)
    return cluster.lambda_F ** (s - 1) * math.comb(n_F - 1, s - 1) * total


def criticality_residual(cluster: Cluster, constraint: str = "volume", allow_incomplete: bool = False,
                         variant: str = "corrected") -> float:
    """Normalized deviation of sum_l G(v_l) from c (volume) or c K (perimeter), c fitted."""
    if cluster.size == 0:
        raise IncompleteCluster("empty eigenfunction set")
    if not cluster.complete and not allow_incomplete:
        raise IncompleteCluster(f"cluster {cluster.F} holds {cluster.size} eigenfunctions")
    S = cluster.densities(variant).sum(axis=0)
    K = np.full_like(S, cluster.K)
    if constraint == "volume":
        target = np.full_like(S, S.mean())
    elif constraint == "perimeter":
        c = float(np.dot(S, K) / np.dot(K, K))
        target = c * K
    else:
        raise ValueError(f"unknown constraint {constraint!r}")
    scale = float(np.max(np.abs(S)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(S - target)) / scale)


def radial_sums(cluster: Cluster) -> Dict[str, float]:
    """Relative theta-variation of cluster sums of the quantities that enter G."""
    out = {}
    tr = cluster.eigenbasis
    quantities = {
        "v2": lambda t: t["v"] ** 2,
        "grad2": lambda t: t["grad"][0] ** 2 + t["grad"][1] ** 2,
        "lap2": lambda t: t["lap"] ** 2,
        "D2_2": lambda t: t["D2"][0] ** 2 + 2 * t["D2"][1] ** 2 + t["D2"][2] ** 2,
        "vnu2": lambda t: t["v_nu"] ** 2,
        "v_vnu": lambda t: t["v"] * t["v_nu"],
        "vnu_lap": lambda t: t["v_nu"] * t["lap"],
    }
    for name, q in quantities.items():
        S = sum(q(t) for t in tr)
        scale = float(np.max(np.abs(S)))
        out[name] = 0.0 if scale == 0.0 else float(np.ptp(S) / scale)
    return out


def dilation_fd(R: float, params: ParamSet, cluster: Cluster, h: float = 1e-4) -> float:
    """Centred difference of the cluster eigenvalue sum under R -> R +- h, re-solved per mode."""
    tot = 0.0
    for m, trig in cluster.modes:
        lam = cluster.lambda_F
        up = _refine_root(m, R + h, params, lam)
        dn = _refine_root(m, R - h, params, lam)
        tot += (up - dn) / (2.0 * h)
    return tot


def hadamard_report(cluster: Cluster, s: int = 1) -> dict:
    th = theta_grid(len(cluster.eigenbasis[0]["v"]))
    deriv = hadamard_derivative(cluster, s, 1.0)
    res = {"translation_x": hadamard_derivative(cluster, s, np.cos(th)),
           "translation_y": hadamard_derivative(cluster, s, np.sin(th))}
    if cluster.complete:
        res["volume"] = criticality_residual(cluster, "volume")
        res["perimeter"] = criticality_residual(cluster, "perimeter")
    return {"lambda": cluster.lambda_F, "F": list(cluster.F), "s": s, "derivative": deriv, "residuals": res}
