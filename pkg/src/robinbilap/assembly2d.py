"""Bogner-Fox-Schmit (tensor Hermite) discretization on a rectangle.

Every matrix is an exact Kronecker product of 1-D Hermite matrices, so no
2-D quadrature is needed.  Node (i, j) carries the dofs (u, u_x, u_y, u_xy);
in Kronecker order the global index is (2i + a) * ndy + (2j + b) with
a, b in {0, 1} the derivative orders in x and y.
"""
from __future__ import annotations

import numpy as np

from .assembly1d import DiscreteForm, build_form, global_matrices_1d
from .hermite import uniform_nodes
from .model import BoundaryRegime, ParamSet, Rectangle, validate


def _dof(i, a, j, b, ndy):
    return (2 * i + a) * ndy + (2 * j + b)


def constrained_dofs_2d(nx: int, ny: int, regime: BoundaryRegime) -> np.ndarray:
    """Dofs removed by ``regime`` on an (nx, ny)-element grid.

    On the edges x = const the tangential derivative is d/dy (b = 1) and the
    normal one is d/dx (a = 1); symmetrically on y = const.
    Value clamping removes u and the tangential derivative; at corners this
    means u, u_x, u_y while u_xy stays free (sin(pi x) sin(pi y) is admissible).
    Normal clamping removes the normal derivative and its tangential derivative
    u_xy.
    """
    ndy = 2 * (ny + 1)
    out = set()
    for i in range(nx + 1):
        for j in range(ny + 1):
            on_x = i in (0, nx)  # an edge x = const
            on_y = j in (0, ny)
            if not (on_x or on_y):
                continue
            if regime.clamps_value:
                out.add(_dof(i, 0, j, 0, ndy))
                if on_x:
                    out.add(_dof(i, 0, j, 1, ndy))
                if on_y:
                    out.add(_dof(i, 1, j, 0, ndy))
            if regime.clamps_normal:
                if on_x:
                    out.add(_dof(i, 1, j, 0, ndy))
                if on_y:
                    out.add(_dof(i, 0, j, 1, ndy))
                out.add(_dof(i, 1, j, 1, ndy))
    return np.array(sorted(out), dtype=int)


def assemble_rectangle(domain: Rectangle, params: ParamSet, nx: int = 8, ny: int = 8) -> DiscreteForm:
    validate(domain, params)
    if nx < 2 or ny < 2:
        raise ValueError("nx, ny must be >= 2")
    xs = uniform_nodes(0.0, domain.Lx, nx)
    ys = uniform_nodes(0.0, domain.Ly, ny)
    X = global_matrices_1d(xs)
    Y = global_matrices_1d(ys)
    k = np.kron
    F = k(X["K2"], Y["M"]) + k(X["M"], Y["K2"]) + 2.0 * k(X["K1"], Y["K1"])
    Lap = k(X["K2"], Y["M"]) + k(X["M"], Y["K2"]) + k(X["C"], Y["C"].T) + k(X["C"].T, Y["C"])
    full = {
        "F": F,
        "Lap": 0.5 * (Lap + Lap.T),
        "L": k(X["K1"], Y["M"]) + k(X["M"], Y["K1"]),
        "T": k(X["T1"], Y["M"]) + k(X["M"], Y["T1"]),
        "Mb": k(X["V1"], Y["M"]) + k(X["M"], Y["V1"]),
        "M": k(X["M"], Y["M"]),
    }
    meta = {
        "kind": "rectangle",
        "nodes_x": xs,
        "nodes_y": ys,
        "dof_roles": ("u", "u_y", "u_x", "u_xy"),
        "nx": nx,
        "ny": ny,
        "h_max": float(max(domain.Lx / nx, domain.Ly / ny)),
        "constrained": {r.value: constrained_dofs_2d(nx, ny, r) for r in BoundaryRegime},
    }
    return build_form(full, meta, params)


def edge_constraints(form: DiscreteForm, regime: BoundaryRegime) -> DiscreteForm:
    """Restrict a rectangle form to the dofs of ``regime`` (same semantics as apply_regime)."""
    from .assembly1d import apply_regime

    return apply_regime(form, regime)
