import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robinbilap import duality, oracles
from robinbilap.model import Disk, Interval, ParamSet

UNIT = Interval(0.0, 1.0)


def test_clamped_buckling_load():
    b = duality.solve_buckling(UNIT, ParamSet(0, 0, math.inf, math.inf), {"n": 64}, 1)
    assert b.eigenvalues[0] == pytest.approx(oracles.buckling_clamped_column(), rel=1e-6)


@given(st.floats(0.5, 5), st.floats(0.5, 5), st.floats(0.5, 5), st.sampled_from(["alpha", "beta", "gamma"]),
       st.integers(1, 2))
def test_interval_crossings(a, b, g, axis, k):
    p = ParamSet(0.0, a, b, g).replace(**{axis: 0.0})
    r = duality.crossing_check(UNIT, p, axis, k, find_zero=False)
    assert r.ok


@pytest.mark.parametrize("axis", ["alpha", "beta", "gamma"])
def test_disk_crossing_k3(axis):
    p = ParamSet(0.3, 1.5, 2.0, 2.5).replace(**{axis: 0.0})
    r = duality.crossing_check(Disk(1.0), p, axis, 3)
    assert r.ok
    assert r.abs_gap <= 1e-8 * (1 + abs(r.predicted))


def test_interval_steklov_rank_two():
    with pytest.raises(ValueError):
        duality.crossing_check(UNIT, ParamSet(0, 1.0, 0.0, 1.0), "beta", 3)
    assert len(duality.solve_steklov("Trace", UNIT, ParamSet(0, 1.0, 1.0, 0.0)).eigenvalues) == 2


def test_unknown_pencil():
    with pytest.raises(ValueError):
        duality.solve_steklov("Robin", UNIT, ParamSet())
