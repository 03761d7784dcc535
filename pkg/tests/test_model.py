import json
import math

import pytest
from hypothesis import given, strategies as st

from robinbilap.errors import DegenerateDomain, SigmaOutOfRange
from robinbilap.model import (BoundaryRegime, Disk, ExtReal, Interval, ParamSet, Rectangle,
                              domain_from_json, validate)

finite = st.floats(-1e6, 1e6, allow_nan=False)
ext = st.one_of(finite, st.just(math.inf))


def test_regimes():
    inf = math.inf
    assert ParamSet(0, 0, 1, 2).regime is BoundaryRegime.FULL_ROBIN
    assert ParamSet(0, 0, 1, inf).regime is BoundaryRegime.NAVIER_ROBIN
    assert ParamSet(0, 0, inf, 2).regime is BoundaryRegime.KUTTLER_SIGILLITO
    assert ParamSet(0, 0, inf, inf).regime is BoundaryRegime.DIRICHLET


def test_inf_string():
    assert not ExtReal.coerce("inf").is_finite
    assert ParamSet.from_json({"beta": "inf"}).regime is BoundaryRegime.KUTTLER_SIGILLITO


@given(st.floats(-0.9, 0.9), finite, ext, ext)
def test_params_roundtrip(s, a, b, g):
    p = ParamSet(s, a, b, g)
    assert ParamSet.from_json(json.loads(json.dumps(p.to_json()))) == p


@pytest.mark.parametrize("dom", [Interval(0.0, 2.0), Rectangle(1.0, 3.0), Disk(0.5)])
def test_domain_roundtrip(dom):
    assert domain_from_json(dom.to_json()) == dom


def test_validation():
    with pytest.raises(SigmaOutOfRange):
        validate(Disk(1.0), ParamSet(1.0, 0, 0, 0))
    with pytest.raises(SigmaOutOfRange):
        validate(Rectangle(1, 1), ParamSet(-1.0, 0, 0, 0))
    with pytest.raises(DegenerateDomain):
        validate(Disk(0.0), ParamSet(0.3, 0, 0, 0))
    validate(Disk(1.0), ParamSet(-0.99, 0, 0, 0))
