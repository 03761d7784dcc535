import math

import numpy as np
import pytest

from robinbilap import oracles
from robinbilap.diskpolar import analytic_disk_spectrum, boundary_determinant, fem_disk_spectrum, mode_roots
from robinbilap.model import ParamSet

INF = math.inf


def test_clamped_disk_anchor():
    lam = analytic_disk_spectrum(1.0, ParamSet(0.3, 0, INF, INF), 1).eigenvalues[0]
    assert lam == pytest.approx(104.363, rel=1e-5)
    assert lam == pytest.approx(oracles.clamped_disk_lambda(), rel=1e-10)


@pytest.mark.parametrize("p", [ParamSet(0.3, 2.0, 1.0, 4.0), ParamSet(-0.2, -7.0, 3.0, INF),
                               ParamSet(0.5, 5.0, INF, -2.0), ParamSet(0.1, -3.0, INF, INF)])
def test_analytic_vs_fem(p):
    an = analytic_disk_spectrum(0.8, p, 6).eigenvalues
    fe = fem_disk_spectrum(0.8, p, 6, n_elems=128).eigenvalues
    assert np.max(np.abs(an - fe) / np.maximum(np.abs(an), 1)) < 1e-6


def test_multiplicity_two_for_m_positive():
    sp = analytic_disk_spectrum(1.0, ParamSet(0.3, 0, INF, INF), 3)
    assert sp.eigenvalues[1] == pytest.approx(sp.eigenvalues[2], rel=1e-12)
    assert sp.meta["modes"][1:3] == [1, 1]


def test_determinant_vanishes_at_roots():
    p = ParamSet(0.3, 1.0, 2.0, 3.0)
    for lam in mode_roots(2, 1.0, p, (0.0, 500.0)):
        assert abs(boundary_determinant(2, lam, 1.0, p)) < 1e-6 * max(
            abs(boundary_determinant(2, lam * 1.01, 1.0, p)), 1e-300)


def test_radius_scaling():
    a = analytic_disk_spectrum(1.0, ParamSet(0.3, 0, INF, INF), 1).eigenvalues[0]
    b = analytic_disk_spectrum(2.0, ParamSet(0.3, 0, INF, INF), 1).eigenvalues[0]
    assert b == pytest.approx(a / 16, rel=1e-10)
