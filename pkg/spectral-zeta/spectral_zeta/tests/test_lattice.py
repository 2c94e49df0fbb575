import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_zeta.common import (
    ConvergenceError,
    DomainError,
    ExperimentalWarning,
    SingularTermError,
)
from spectral_zeta.lattice import (
    EpsteinParams,
    QuadraticFormSpec,
    direct_lattice_sum,
    enumerate_half_lattice,
    full_shell,
    minimal_radius,
    tail_bound,
)


@pytest.mark.parametrize(
    "matrix",
    [
        [[1.0, 0.5], [0.4, 1.0]],  # not symmetric
        [[1.0, 2.0], [2.0, 1.0]],  # indefinite
        np.eye(9),  # too many dimensions
        [1.0, 2.0],  # not square
    ],
)
def test_form_rejects(matrix):
    with pytest.raises(DomainError):
        QuadraticFormSpec(matrix)


def test_form_conversions():
    form = QuadraticFormSpec.from_coefficients(1.5, 0.5, 2.0)
    assert form.value([1, 0])[0] == pytest.approx(1.5)
    assert form.value([1, 1])[0] == pytest.approx(4.0)
    assert form.det == pytest.approx(4 * 1.5 * 2.0 - 0.25)

    g = np.array([[2.0, 0.3], [0.3, 1.0]])
    metric = QuadraticFormSpec.from_metric(g)
    n = np.array([[1, 2], [-1, 3]])
    assert metric.value(n) == pytest.approx(np.einsum("ij,jk,ik->i", n, g, n))

    dual = QuadraticFormSpec(np.diag([2.0, 4.0]))
    assert dual.dual_value([1, 1])[0] == pytest.approx(0.75)


def test_form_scalar():
    form = QuadraticFormSpec(3.0)
    assert form.p == 1
    assert form.value([2])[0] == pytest.approx(6.0)


@pytest.mark.parametrize("p, r", [(1, 1), (2, 1), (2, 3), (3, 2)])
def test_full_shell_count(p, r):
    shell = full_shell(p, r)
    assert len(shell) == (2 * r + 1) ** p - (2 * r - 1) ** p
    assert np.all(np.max(np.abs(shell), axis=1) == r)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4))
def test_half_lattice_covers_shell(p, r):
    half = enumerate_half_lattice(p, r)
    both = {tuple(v) for v in half} | {tuple(-v) for v in half}
    assert len(half) * 2 == len(full_shell(p, r))
    assert both == {tuple(v) for v in full_shell(p, r)}


def test_half_lattice_origin():
    assert enumerate_half_lattice(3, 0).shape == (0, 3)


def test_params_validation():
    form = QuadraticFormSpec(np.eye(2))
    with pytest.raises(DomainError):
        EpsteinParams(form, c=[0.1, 0.2, 0.3])
    with pytest.raises(DomainError):
        EpsteinParams(form, q=-1.0)
    with pytest.warns(ExperimentalWarning):
        params = EpsteinParams(form, q=1 + 1j, experimental=True)
    assert params.q == 1 + 1j
    assert EpsteinParams(form, c=[0.5, 0], q=1).origin_base == pytest.approx(1.125)


def test_direct_sum_riemann():
    # Q(n) = n^2 on Z: sum' n^{-2s} = 2 zeta(2s)
    params = EpsteinParams(QuadraticFormSpec([[2.0]]))
    value = direct_lattice_sum(params, 2.0)
    expected = math.pi ** 4 / 45
    assert abs(value.value - expected) <= value.err_estimate + 1e-14
    assert value.err_estimate < 1e-8


def test_direct_sum_tail_bound_rigorous():
    params = EpsteinParams(QuadraticFormSpec(np.eye(2) * 2), q=0.5)
    coarse = direct_lattice_sum(params, 2.5, radius=10)
    fine = direct_lattice_sum(params, 2.5, radius=200)
    assert abs(fine.value - coarse.value) <= coarse.err_estimate
    assert tail_bound(params, 2.5, 10) == coarse.err_estimate


def test_direct_sum_threads_are_ordered():
    params = EpsteinParams(QuadraticFormSpec([[2.0, 0.3], [0.3, 1.0]]), c=[0.1, 0.4], q=1.0)
    serial = direct_lattice_sum(params, 3.0, radius=30)
    pooled = direct_lattice_sum(params, 3.0, radius=30, n_jobs=4)
    assert serial.value == pooled.value


def test_direct_sum_errors():
    params = EpsteinParams(QuadraticFormSpec(np.eye(2)))
    with pytest.raises(ConvergenceError):
        direct_lattice_sum(params, 1.0)
    with pytest.raises(SingularTermError):
        direct_lattice_sum(params, 2.0, excludes_origin=False)


@pytest.mark.parametrize("p, c", [(1, None), (2, [0.5, 0.5]), (3, [2.0, 0.0, 0.0])])
def test_direct_sum_radius_too_small(p, c):
    params = EpsteinParams(QuadraticFormSpec(2 * np.eye(p)), c=c, q=1.0)
    smallest = minimal_radius(params)
    assert math.isinf(tail_bound(params, p / 2 + 1, smallest - 1))
    assert math.isfinite(tail_bound(params, p / 2 + 1, smallest))
    with pytest.raises(DomainError, match="too small"):
        direct_lattice_sum(params, p / 2 + 1, radius=smallest - 1)
    value = direct_lattice_sum(params, p / 2 + 1, radius=smallest)
    assert math.isfinite(value.err_estimate)
