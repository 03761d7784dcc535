import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robinbilap import sweeps
from robinbilap.model import BoundaryRegime, Disk, Interval, ParamSet
from robinbilap.errors import SignMismatch

UNIT = Interval(0.0, 1.0)


@given(st.sampled_from(["alpha", "beta", "gamma"]), st.floats(-5, 5), st.floats(0.01, 5))
def test_monotone_on_fixed_mesh(axis, x0, dx):
    base = ParamSet(0.0, 1.0, 1.0, 1.0)
    plan = sweeps.SweepPlan(UNIT, base, axis, [x0, x0 + dx], k_track=(1, 2, 3), disc={"n": 24}, fixed_mesh=True)
    assert sweeps.run_sweep(plan).monotone_violations == []


def test_sweep_records_schema():
    plan = sweeps.SweepPlan(UNIT, ParamSet(), "alpha", [-1.0, 0.0, 1.0], k_track=(1, 2))
    recs = sweeps.run_sweep(plan).records()
    assert len(recs) == 6
    assert list(recs[0]) == ["axis", "k", "lambda", "residual", "mesh_h", "status"]


def test_plan_rejects_non_monotone_values():
    with pytest.raises(ValueError):
        sweeps.SweepPlan(UNIT, ParamSet(), "alpha", [0.0, 1.0, 0.5])
    with pytest.raises(ValueError):
        sweeps.SweepPlan(UNIT, ParamSet(), "delta", [0.0, 1.0])


def test_gamma_rate_interval():
    plan = sweeps.SweepPlan(UNIT, ParamSet(), "gamma", np.sort(-np.logspace(1, 6, 21)))
    fit = sweeps.fit_rate(sweeps.run_sweep(plan), 1, "decade")
    assert fit.exponent == pytest.approx(4 / 3, abs=0.05)


def test_fit_power_exact():
    x = np.logspace(0, 3, 10)
    fit = sweeps.fit_power(x, 3.0 * x ** 1.7)
    assert fit.exponent == pytest.approx(1.7, abs=1e-12)
    with pytest.raises(SignMismatch):
        sweeps.fit_power(x, np.where(x > 10, 1.0, -1.0))


def test_limit_to_clamped():
    r = sweeps.limit_convergence(UNIT, ParamSet(0, 0, 0, 0), "joint", BoundaryRegime.DIRICHLET,
                                 np.logspace(1, 6, 16), 1)
    assert r.limit == pytest.approx(500.5639, rel=1e-6)
    assert r.monotone and r.bounded and r.rate_fit.exponent >= 0.45


def test_alpha_scaling_dirichlet():
    r = sweeps.alpha_scaling(UNIT, ParamSet(0, 0, math.inf, math.inf), None, 1, [1e5, 1e6])
    assert r.rel_err < 0.01
    assert r.oracle == pytest.approx(math.pi ** 2)


def test_weyl_value_1d():
    assert sweeps.weyl_value(7, UNIT) == pytest.approx((7 * math.pi) ** 4)


def test_weyl_hinged_exact():
    sp = sweeps.lowest_eigenvalues(UNIT, ParamSet(0, 0, 0, math.inf), 10, {"n": 256})
    assert sweeps.weyl_check(sp, UNIT, (1, 10)).max_dev < 1e-6


def test_disk_rows():
    sp = sweeps.lowest_eigenvalues(Disk(1.0), ParamSet(0.3, 0, math.inf, math.inf), 3, {"n": 48})
    assert sp.eigenvalues[0] == pytest.approx(104.363, rel=1e-5)
