import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robinbilap import bounds
from robinbilap.errors import MissingConstants, RegimeUnsupported
from robinbilap.model import Disk, Interval, ParamSet, Rectangle
from robinbilap.sweeps import lowest_eigenvalues

UNIT = Interval(0.0, 1.0)


@pytest.fixture(scope="module")
def consts():
    return bounds.estimate_trace_constants(UNIT, {"n": 32})


def test_interval_ratios_are_coth():
    f1, f2 = bounds.boundary_ratios(UNIT, 3.0, 1.0)
    assert f1 == pytest.approx(1 / math.tanh(3.0)) and f2 == pytest.approx(1 / math.tanh(3.0))


def test_disk_ratios_bessel():
    from scipy.special import i0e, i1e

    t, R = 2.5, 0.7
    f1, f2 = bounds.boundary_ratios(Disk(R), t)
    z = 2 * t * R
    assert f2 == pytest.approx(i0e(z) / i1e(z), rel=1e-12)
    assert f1 == pytest.approx(i0e(z) / i1e(z) - 1 / z, rel=1e-12)


@given(st.floats(-80, 20), st.floats(-5, 5), st.floats(-20, 20))
def test_certificate_is_upper_bound(a, b, g):
    p = ParamSet(0.0, a, b, g)
    cert = bounds.best_certificate(UNIT, p)
    lam = lowest_eigenvalues(UNIT, p, 1).eigenvalues[0]
    assert lam <= cert.upper_bound + 1e-9 * max(1, abs(lam))


def test_alpha_ratio_exact():
    c = bounds.optimized_certificate(UNIT, ParamSet(0, -1e3, 0, 0), "alpha")
    assert c.meta["ratio"] == pytest.approx(0.25, rel=1e-12)


@pytest.mark.parametrize("dom", [UNIT, Disk(1.0)])
@pytest.mark.parametrize("axis,make", [("beta", lambda x: ParamSet(0.3, 0, x, 0)),
                                       ("gamma", lambda x: ParamSet(0.3, 0, 0, x))])
def test_ratios_converge(dom, axis, make):
    c = bounds.COEFFICIENTS[axis]
    r = [bounds.optimized_certificate(dom, make(-x), axis).meta["ratio"] for x in (1e2, 1e4, 1e6)]
    d = np.abs(np.array(r) - c)
    assert np.all(np.diff(d) <= 0) and d[-1] < 0.01 * c


def test_certificate_needs_negative_axis():
    with pytest.raises(ValueError):
        bounds.optimized_certificate(UNIT, ParamSet(0, 1.0, 0, 0), "alpha")


def test_certificate_full_robin_only():
    with pytest.raises(RegimeUnsupported):
        bounds.exp_certificate(UNIT, ParamSet(0, -1, 0, math.inf), 1.0)


def test_rectangle_directions():
    assert len(bounds.directions(Rectangle(1, 1))) == bounds.N_DIRECTIONS_2D
    assert bounds.best_certificate(Rectangle(1, 1), ParamSet(0.3, -50, 0, 0)).upper_bound < 0


def test_sandwich(consts):
    for p in (ParamSet(0, -30, 1, 2), ParamSet(0, 5, -2, 1), ParamSet(0, 0, 0, -15)):
        lam = lowest_eigenvalues(UNIT, p, 1).eigenvalues[0]
        assert bounds.sandwich(UNIT, p, lam, consts)["ok"]


def test_constants_dominate_discrete_ratios(consts):
    from robinbilap.assembly1d import assemble_interval

    f = assemble_interval(UNIT, ParamSet(), 32)
    rng = np.random.default_rng(5)
    for _ in range(20):
        r = bounds.inequality_ratios(f.full, 0.0, rng.standard_normal(f.full["M"].shape[0]))
        assert r["grad"] <= consts.C and r["normal"] <= consts.C1 and r["trace"] <= consts.C3


def test_lower_bound_needs_constants():
    with pytest.raises(MissingConstants):
        bounds.numerical_range_lower_bound(UNIT, ParamSet(0, -1, 0, 0), None)
