import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robinbilap import shape
from robinbilap.errors import IncompleteCluster, MissingTraceOrder, RegimeUnsupported
from robinbilap.model import ParamSet


@pytest.mark.parametrize("k", [1, 2, 4])
def test_free_plate_dilation_exact(k):
    # free plate: lambda(R) = lambda(1) R^-4, so d lambda_F / dR summed over F is -4 |F| lambda / R
    p = ParamSet(0.3, 0.0, 0.0, 0.0)
    R = 1.3
    c = shape.disk_cluster(R, p, k + 3)
    d = shape.hadamard_derivative(c, 1, 1.0)
    assert d == pytest.approx(-4.0 * c.size * c.lambda_F / R, rel=1e-6)


@given(st.floats(0.0, 0.5), st.floats(-4, 4), st.floats(-1, 3), st.floats(-2, 4), st.integers(1, 5))
def test_dilation_matches_fd(s, a, b, g, k):
    p = ParamSet(s, a, b, g)
    c = shape.disk_cluster(1.0, p, k, n_theta=128)
    fd = shape.dilation_fd(1.0, p, c)
    assert shape.hadamard_derivative(c, 1, 1.0) == pytest.approx(fd, rel=1e-4, abs=1e-6)


def test_translation_vanishes_and_criticality():
    c = shape.disk_cluster(1.0, ParamSet(0.3, 2.0, 1.0, 3.0), 2)
    th = shape.theta_grid()
    for f in (np.cos(th), np.sin(th)):
        assert abs(shape.hadamard_derivative(c, 1, f)) < 1e-10
    assert shape.criticality_residual(c, "volume") < 1e-10
    assert shape.criticality_residual(c, "perimeter") < 1e-10


def test_printed_density_fails_dilation():
    p = ParamSet(0.3, 2.0, 1.0, 3.0)
    c = shape.disk_cluster(1.0, p, 1)
    fd = shape.dilation_fd(1.0, p, c)
    assert abs(shape.hadamard_derivative(c, 1, 1.0, "printed") - fd) > 1e-2 * abs(fd)


def test_symmetric_function_weights():
    c = shape.disk_cluster(1.0, ParamSet(0.3, 1.0, 1.0, 1.0), 2)
    assert c.size == 2
    d1 = shape.hadamard_derivative(c, 1, 1.0)
    assert shape.hadamard_derivative(c, 2, 1.0) == pytest.approx(c.lambda_F * d1, rel=1e-12)
    with pytest.raises(ValueError):
        shape.hadamard_derivative(c, 3, 1.0)


def test_incomplete_cluster():
    c = shape.disk_cluster(1.0, ParamSet(0.3, 1.0, 1.0, 1.0), 2).truncate([0])
    with pytest.raises(IncompleteCluster):
        shape.criticality_residual(c)
    assert shape.criticality_residual(c, allow_incomplete=True) > 1e-3


def test_regime_and_trace_errors():
    with pytest.raises(RegimeUnsupported):
        shape.disk_cluster(1.0, ParamSet(0.3, 0, 0, math.inf), 1)
    with pytest.raises(MissingTraceOrder):
        shape.eval_G({"v": np.zeros(4)}, ParamSet(0.3, 0, 0, 0), 1.0, 0.0)
