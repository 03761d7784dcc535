import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robinbilap import oracles
from robinbilap.assembly1d import assemble_interval, rayleigh, solve_form
from robinbilap.assembly2d import assemble_rectangle
from robinbilap.model import Interval, ParamSet, Rectangle

INF = math.inf
UNIT = Interval(0.0, 1.0)


def test_clamped_beam():
    lam = solve_form(assemble_interval(UNIT, ParamSet(0, 0, INF, INF), 64), 3).eigenvalues
    assert lam[0] == pytest.approx(oracles.clamped_beam_lambda(1), rel=1e-6)
    for k in (1, 2):
        assert lam[k] == pytest.approx(oracles.clamped_beam_lambda(k + 1), rel=1e-5)


def test_free_beam_has_rigid_modes():
    lam = solve_form(assemble_interval(UNIT, ParamSet(0, 0, 0, 0), 64), 4).eigenvalues
    assert abs(lam[0]) < 1e-8 and abs(lam[1]) < 1e-6
    assert lam[2] == pytest.approx(oracles.free_beam_lambda(3), rel=1e-6)


def test_length_scaling():
    # lambda(0, L) = lambda(0, 1) / L^4 for the clamped beam
    lam = solve_form(assemble_interval(Interval(0.0, 2.0), ParamSet(0, 0, INF, INF), 64), 1).eigenvalues[0]
    assert lam == pytest.approx(oracles.clamped_beam_lambda(1) / 16.0, rel=1e-6)


@given(st.floats(-30, 30), st.floats(-3, 10), st.floats(-10, 30))
def test_rayleigh_upper_bounds_lambda1(a, b, g):
    f = assemble_interval(UNIT, ParamSet(0, a, b, g), 32)
    sp = solve_form(f, 1, want_vectors=True)
    v = np.random.default_rng(0).standard_normal(f.n_free)
    assert rayleigh(f, v) >= sp.eigenvalues[0] - 1e-8 * max(1.0, abs(sp.eigenvalues[0]))


def test_with_params_matches_fresh_assembly():
    f = assemble_interval(UNIT, ParamSet(0, 1.0, 2.0, 3.0), 24)
    g = f.with_params(ParamSet(0, -4.0, 0.5, INF))
    h = assemble_interval(UNIT, ParamSet(0, -4.0, 0.5, INF), 24)
    assert np.allclose(solve_form(g, 4).eigenvalues, solve_form(h, 4).eigenvalues, rtol=1e-12)


def test_navier_rectangle():
    # hinged plate: (pi^2 (m^2/Lx^2 + n^2/Ly^2))^2
    dom = Rectangle(1.0, 2.0)
    lam = solve_form(assemble_rectangle(dom, ParamSet(0.3, 0, 0, INF), 10, 10), 1).eigenvalues[0]
    exact = (math.pi ** 2 * (1 + 0.25)) ** 2
    assert lam == pytest.approx(exact, rel=1e-4)


def test_clamped_square():
    lam = solve_form(assemble_rectangle(Rectangle(1, 1), ParamSet(0.3, 0, INF, INF), 10, 10), 1).eigenvalues[0]
    assert lam == pytest.approx(35.985 ** 2, rel=2e-3)


def test_rectangle_sigma_invariance_clamped():
    # the Hessian and Laplacian energies agree on H^2_0
    d = Rectangle(1.0, 1.5)
    a = solve_form(assemble_rectangle(d, ParamSet(0.0, 0, INF, INF), 6, 6), 3).eigenvalues
    b = solve_form(assemble_rectangle(d, ParamSet(0.7, 0, INF, INF), 6, 6), 3).eigenvalues
    assert np.allclose(a, b, rtol=1e-10)
