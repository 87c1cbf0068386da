import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rangepolymer.logreal import NEG_INF, LogReal, log_signed_sum, log_sum

logs = st.floats(min_value=-700, max_value=5, allow_nan=False)


@given(logs, logs)
def test_add_matches_linear(a, b):
    got = (LogReal(a) + LogReal(b)).log_value
    assert got == pytest.approx(float(np.logaddexp(a, b)), rel=1e-14, abs=1e-14)


@given(logs, logs)
def test_mul_is_log_addition(a, b):
    assert (LogReal(a) * LogReal(b)).log_value == a + b


@given(logs, logs)
def test_ordering_is_monotone(a, b):
    assert (LogReal(a) < LogReal(b)) == (a < b)


@given(st.floats(min_value=-700, max_value=0))
def test_value_never_overflows_for_probabilities(a):
    assert 0.0 <= LogReal(a).value <= 1.0


def test_zero_and_one():
    assert LogReal.zero().is_zero()
    assert LogReal.one().value == 1.0
    assert (LogReal.zero() * LogReal.one()).is_zero()
    assert LogReal.from_float(0.0).is_zero()


@pytest.mark.parametrize("bad", [math.nan, math.inf])
def test_rejects_invalid(bad):
    with pytest.raises(ValueError):
        LogReal(bad)


def test_subtraction():
    a, b = LogReal.from_float(0.75), LogReal.from_float(0.25)
    assert (a - b).value == pytest.approx(0.5, rel=1e-15)
    assert (a - a).is_zero()
    with pytest.raises(ValueError):
        b - a


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        LogReal.one() / LogReal.zero()


def test_log_sum_edge_cases():
    assert log_sum([]) == NEG_INF
    assert log_sum([NEG_INF, NEG_INF]) == NEG_INF
    assert log_sum([-1000.0, -1000.0]) == pytest.approx(-1000.0 + math.log(2))


def test_log_signed_sum_cancellation():
    lv, sign = log_signed_sum([math.log(3.0), math.log(1.0)], [1, -1])
    assert sign == 1.0 and lv == pytest.approx(math.log(2.0))
    lv, sign = log_signed_sum([0.0, 0.0], [1, -1])
    assert lv == NEG_INF and sign == 0.0
