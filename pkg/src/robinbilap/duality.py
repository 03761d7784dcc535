"""Buckling and Steklov-type pencils and their zero-crossing duality with the eigencurves.

For fixed (beta, gamma) the curve alpha -> lambda_k(alpha) vanishes exactly
at alpha = -Lambda_k, where Lambda_k are the buckling loads
A0 u = Lambda L u.  Likewise beta -> lambda_k vanishes at -eta_k (Steklov
pencil with the normal-derivative boundary mass) and gamma -> lambda_k at
-xi_k (pencil with the boundary trace mass).  All pencils share one mesh
with the eigencurves, so the duality holds to solver precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .assembly1d import assemble_interval, solve_form
from .assembly2d import assemble_rectangle
from .diskpolar import radial_form
from .eigsolve import PencilKind, PencilProblem, solve
from .model import Disk, Interval, ParamSet, Rectangle, Spectrum

STEKLOV_KINDS = ("NormalDeriv", "Trace")
AXIS_PENCIL = {"alpha": "buckling", "beta": "NormalDeriv", "gamma": "Trace"}
CROSSING_RTOL = 1e-6


def _blocks(domain, params: ParamSet, disc: Optional[dict]) -> List[Tuple[int, int, object]]:
    """(mode, multiplicity, form) blocks of the discrete space; a single block off the disk."""
    disc = dict(disc or {})
    if isinstance(domain, Interval):
        return [(0, 1, assemble_interval(domain, params, n_elems=disc.get("n", 64), nodes=disc.get("nodes")))]
    if isinstance(domain, Rectangle):
        n = disc.get("n", 8)
        return [(0, 1, assemble_rectangle(domain, params, disc.get("nx", n), disc.get("ny", n)))]
    if isinstance(domain, Disk):
        out = []
        for m in range(disc.get("m_max", 8) + 1):
            out.append((m, 1 if m == 0 else 2,
                        radial_form(m, domain.R, params, n_elems=disc.get("n", 48), nodes=disc.get("nodes"))))
        return out
    raise TypeError(f"unsupported domain {domain!r}")


def _merge(parts, k=None) -> Spectrum:
    vals, modes, res = [], [], []
    for m, mult, sp in parts:
        for lam, r in zip(sp.eigenvalues, sp.residual_norms):
            vals.extend([lam] * mult)
            modes.extend([m] * mult)
            res.extend([r] * mult)
    order = np.argsort(vals, kind="stable")
    if k:
        order = order[:k]
    meta = {"modes": np.asarray(modes, dtype=int)[order].tolist()}
    for m, mult, sp in parts[:1]:
        meta.update({key: sp.meta[key] for key in ("kernel_dim", "common_kernel_dim") if key in sp.meta})
    return Spectrum(np.asarray(vals)[order], None, np.asarray(res)[order], meta=meta)


def _pencil(form, rhs_key: str) -> Spectrum:
    return solve(PencilProblem(form.A, form.aux[rhs_key], kind=PencilKind.SEMIDEFINITE_RHS,
                               want_vectors=False))


def solve_buckling(domain, params: ParamSet, disc: Optional[dict] = None, k: Optional[int] = None) -> Spectrum:
    """Loads Lambda of A0(beta, gamma) u = Lambda L u, with A0 the alpha = 0 energy."""
    p0 = params.replace(alpha=0.0)
    parts = [(m, mult, _pencil(form, "L")) for m, mult, form in _blocks(domain, p0, disc)]
    out = _merge(parts, k)
    out.meta.update(pencil="buckling")
    return out


def solve_steklov(which: str, domain, params: ParamSet, disc: Optional[dict] = None,
                  k: Optional[int] = None) -> Spectrum:
    """Finite eigenvalues of the Steklov-type pencil.

    ``NormalDeriv``: A(alpha, 0, gamma) u = eta T u;  ``Trace``: A(alpha, beta, 0) u = xi Mb u.
    """
    if which == "NormalDeriv":
        p0, key = params.replace(beta=0.0), "T"
    elif which == "Trace":
        p0, key = params.replace(gamma=0.0), "Mb"
    else:
        raise ValueError(f"which must be one of {STEKLOV_KINDS}")
    parts = [(m, mult, _pencil(form, key)) for m, mult, form in _blocks(domain, p0, disc)]
    out = _merge(parts, k)
    out.meta.update(pencil=which)
    return out


def pencil_values(axis: str, domain, params: ParamSet, disc: Optional[dict] = None, k: Optional[int] = None):
    if axis == "alpha":
        return solve_buckling(domain, params, disc, k)
    return solve_steklov(AXIS_PENCIL[axis], domain, params, disc, k)


def curve_spectrum(domain, params: ParamSet, k: int, disc: Optional[dict] = None) -> Spectrum:
    """First k Robin eigenvalues on the same mesh the pencils use."""
    parts = []
    for m, mult, form in _blocks(domain, params, disc):
        parts.append((m, mult, solve_form(form, min(k, form.n_free))))
    return _merge(parts, k)


def _at(params: ParamSet, axis: str, x: float) -> ParamSet:
    return params.replace(**{axis: x})


def curve_zero(domain, params: ParamSet, axis: str, k: int, guess: float,
               disc: Optional[dict] = None, xtol: float = 1e-13) -> float:
    """Root of x -> lambda_k(axis = x) near ``guess`` (the curve is increasing)."""
    f = lambda x: float(curve_spectrum(domain, _at(params, axis, x), k, disc).eigenvalues[k - 1])
    w = 1e-3 * (1.0 + abs(guess))
    lo, hi = guess - w, guess + w
    flo, fhi = f(lo), f(hi)
    for _ in range(60):
        if flo <= 0.0 <= fhi:
            break
        w *= 2.0
        if flo > 0.0:
            lo = guess - w
            flo = f(lo)
        if fhi < 0.0:
            hi = guess + w
            fhi = f(hi)
    else:
        raise ValueError(f"no sign change of lambda_{k} along {axis} near {guess}")
    return brentq(f, lo, hi, xtol=xtol * (1.0 + abs(guess)), rtol=1e-15)


@dataclass
class CrossingReport:
    axis: str
    k: int
    pencil_value: float
    predicted: float
    lambda_at_prediction: float
    curve_zero: float
    abs_gap: float
    scale: float
    multiplicity_pencil: int
    multiplicity_curve: int

    @property
    def ok(self) -> bool:
        tol = CROSSING_RTOL * (1.0 + self.scale)
        return abs(self.lambda_at_prediction) <= tol and self.multiplicity_pencil == self.multiplicity_curve

    def to_json(self) -> dict:
        return {"axis": self.axis, "k": self.k, "pencil_value": self.pencil_value,
                "predicted": self.predicted, "lambda_at_prediction": self.lambda_at_prediction,
                "curve_zero": self.curve_zero, "abs_gap": self.abs_gap, "scale": self.scale,
                "multiplicity_pencil": self.multiplicity_pencil,
                "multiplicity_curve": self.multiplicity_curve, "ok": self.ok}


def crossing_check(domain, params: ParamSet, axis: str, k: int, disc: Optional[dict] = None,
                   find_zero: bool = True) -> CrossingReport:
    """Verify lambda_k(axis = -pencil_k) = 0 and, independently, locate the curve zero by root finding."""
    if axis not in AXIS_PENCIL:
        raise ValueError(f"axis must be one of {tuple(AXIS_PENCIL)}")
    pv = pencil_values(axis, domain, params, disc, k + 4)
    if len(pv.eigenvalues) < k:
        # the boundary of an interval has two points, so the 1-D Steklov pencils have rank 2
        raise ValueError(f"the {axis} pencil has only {len(pv.eigenvalues)} finite eigenvalues")
    value = float(pv.eigenvalues[k - 1])
    predicted = -value
    base = curve_spectrum(domain, params, k + 4, disc)
    scale = abs(float(base.eigenvalues[k - 1]))
    at = curve_spectrum(domain, _at(params, axis, predicted), k + 4, disc)
    lam = float(at.eigenvalues[k - 1])
    tol = CROSSING_RTOL * (1.0 + scale)
    mult_p = int(np.sum(np.abs(pv.eigenvalues - value) <= 1e-8 * (1.0 + abs(value))))
    mult_c = int(np.sum(np.abs(at.eigenvalues) <= tol))
    z = curve_zero(domain, params, axis, k, predicted, disc) if find_zero else float("nan")
    return CrossingReport(axis, k, value, predicted, lam, z, abs(z - predicted), scale, mult_p, mult_c)
