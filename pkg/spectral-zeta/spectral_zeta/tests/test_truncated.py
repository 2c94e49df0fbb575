import json
import math
import warnings

import pytest

from spectral_zeta.common import AccuracyFloorWarning, ConvergenceError, DomainError, PoleError
from spectral_zeta.io import encode_result
from spectral_zeta.truncated import (
    MAX_RESIDUE_INDEX,
    TruncatedParams,
    direct_truncated_sum,
    full_line_split_check,
    truncated_residue,
    truncated_zeta,
)


def bernoulli3(x):
    return x ** 3 - 1.5 * x ** 2 + 0.5 * x


@pytest.mark.parametrize("c", [0.3, 0.5, 1.0, 2.3, -0.7])
def test_matches_direct_sum(c):
    # a/q = 1/4 puts the asymptotic floor near 1e-5 unless the series vanishes
    params = TruncatedParams(0.5, c, 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyFloorWarning)
        value = truncated_zeta(params, 2.0)
    direct = direct_truncated_sum(params, 2.0)
    assert value.accuracy_floor_reached == (c not in (0.5, 1.0))
    assert abs(value.value - direct.value) <= 2 * value.err_estimate + direct.err_estimate
    if not value.accuracy_floor_reached:
        assert value.value == pytest.approx(direct.value, rel=1e-11)


@pytest.mark.parametrize("c", [0.3, 0.75, 2.3, -0.7])
def test_matches_direct_sum_small_ratio(c):
    params = TruncatedParams(0.01, c, 2.0)
    value = truncated_zeta(params, 2.0)
    direct = direct_truncated_sum(params, 2.0)
    assert not value.accuracy_floor_reached
    assert abs(value.value - direct.value) <= 1e-10 * abs(direct.value) + direct.err_estimate


def test_matches_direct_sum_complex():
    params = TruncatedParams(0.8, 0.4, 1.5)
    s = 2.5 + 1.5j
    with pytest.warns(AccuracyFloorWarning):
        value = truncated_zeta(params, s)
    direct = direct_truncated_sum(params, s)
    assert value.accuracy_floor_reached
    assert abs(value.value - direct.value) <= 2 * value.err_estimate + direct.err_estimate

    params = TruncatedParams(0.02, 0.4, 1.5)
    value = truncated_zeta(params, s)
    direct = direct_truncated_sum(params, s)
    assert abs(value.value - direct.value) <= 1e-10 * abs(direct.value) + direct.err_estimate


def test_floor_flag_survives_json():
    with pytest.warns(AccuracyFloorWarning):
        value = truncated_zeta(TruncatedParams(0.5, 0.3, 2.0), 2.0).as_zeta_value()
    data = json.loads(encode_result({"value": value}))
    assert data["value"]["accuracy_floor_reached"] is True
    assert data["value"]["underflow"] is False


def test_nonpositive_integers():
    # zeta_H(-2, c) = -B_3(c) / 3 and zeta_H(0, c) = 1/2 - c
    a, c, q = 0.5, 0.3, 2.0
    params = TruncatedParams(a, c, q)
    hurwitz_2 = -bernoulli3(c) / 3
    assert truncated_zeta(params, -1).value.real == pytest.approx(
        a * hurwitz_2 + q * (0.5 - c), rel=1e-12
    )
    assert truncated_zeta(params, 0).value.real == pytest.approx(0.5 - c, rel=1e-12)


def test_full_line_split():
    for s in (2.0, 0.3 + 1j, -0.7 + 0.2j):
        full, split = full_line_split_check(0.6, 0.35, 1.2, s)
        tolerance = 1e-10 * abs(full.value) + full.err_estimate + split.err_estimate
        assert abs(full.value - split.value) <= tolerance
    with pytest.raises(DomainError):
        full_line_split_check(0.6, 1.0, 1.2, 2.0)


@pytest.mark.parametrize("j", [0, 1, 2])
def test_residue_ratio(j):
    residue = truncated_residue(TruncatedParams(0.5, 0.3, 2.0), j)
    assert residue.j == j
    assert residue.ratio == pytest.approx(2.0, rel=1e-6)
    assert residue.closed_form == pytest.approx(
        2.0 ** j * math.prod(range(2 * j - 1, 0, -2)) / (math.factorial(j) * 2 ** j * math.sqrt(0.5))
    )


def test_residue_index_range():
    with pytest.raises(DomainError):
        truncated_residue(TruncatedParams(0.5, 0.3, 2.0), MAX_RESIDUE_INDEX + 1)


def test_pole():
    params = TruncatedParams(1.0, 0.3, 1.0)
    with pytest.raises(PoleError) as e:
        truncated_zeta(params, 0.5)
    assert e.value.residue.real == pytest.approx(0.5 * math.sqrt(math.pi) / math.gamma(0.5))
    near = truncated_zeta(params, 0.503)
    assert near.nearest_pole is not None


def test_accuracy_floor():
    params = TruncatedParams(10.0, 0.3, 0.1)
    with pytest.warns(AccuracyFloorWarning):
        value = truncated_zeta(params, 0.2 + 0.5j)
    assert value.accuracy_floor_reached
    assert value.err_estimate >= value.smallest_term
    assert value.as_zeta_value().accuracy_floor_reached


@pytest.mark.parametrize("kwargs", [{"a": 0.0}, {"q": -1.0}, {"c": 1j}])
def test_params_rejects(kwargs):
    values = {"a": 1.0, "c": 0.3, "q": 1.0}
    values.update(kwargs)
    with pytest.raises(DomainError):
        TruncatedParams(**values)


def test_direct_sum_needs_convergence():
    with pytest.raises(ConvergenceError):
        direct_truncated_sum(TruncatedParams(1.0, 0.3, 1.0), 0.5)
