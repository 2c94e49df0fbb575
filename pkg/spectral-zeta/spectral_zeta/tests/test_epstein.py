import math

import numpy as np
import pytest
from scipy.special import gamma

from spectral_zeta.analytic import extract_residue
from spectral_zeta.common import AccuracyTarget, DomainError, ExperimentalWarning, PoleError
from spectral_zeta.epstein import (
    chowla_selberg_2d,
    epstein_2d_inhomogeneous,
    epstein_inhomogeneous,
    epstein_massless_recursive,
    epstein_parts,
    epstein_reflection,
    eval_1d_inhomogeneous,
    inhomogeneous_poles,
    jacobi_theta_check,
    recurrence_decomposition,
)
from spectral_zeta.lattice import EpsteinParams, QuadraticFormSpec, direct_lattice_sum

CATALAN = 0.915965594177219015

FORMS = {
    1: [[1.5]],
    2: [[2.0, 0.4], [0.4, 1.2]],
    3: [[2.0, 0.2, 0.0], [0.2, 1.5, 0.3], [0.0, 0.3, 1.8]],
}
OFFSETS = {1: [0.3], 2: [0.25, -0.1], 3: [0.1, 0.0, 0.4]}


def make_params(p, q=0.7, offset=True):
    return EpsteinParams(QuadraticFormSpec(FORMS[p]), OFFSETS[p] if offset else None, q)


def leading_residue(params):
    return (2 * math.pi) ** (params.p / 2) / (math.sqrt(params.form.det) * gamma(params.p / 2))


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("imag", [0.0, 0.5])
def test_matches_direct_sum(p, imag):
    params = make_params(p)
    s = complex(p / 2 + 2.5, imag)
    series = epstein_inhomogeneous(params, s)
    oracle = direct_lattice_sum(params, s, excludes_origin=False)
    tolerance = 1e-10 * abs(oracle.value) + oracle.err_estimate + series.err_estimate
    assert abs(series.value - oracle.value) <= tolerance


def test_exclude_origin():
    params = make_params(2)
    s = 3.0
    full = epstein_inhomogeneous(params, s)
    without = epstein_inhomogeneous(params, s, include_origin=False)
    assert full.value - without.value == pytest.approx(params.origin_base ** (-s), rel=1e-12)


def test_parts_add_up():
    params = make_params(3)
    volume, series = epstein_parts(params, 0.3 + 2j)
    total = epstein_inhomogeneous(params, 0.3 + 2j)
    assert volume.value + series.value == pytest.approx(total.value, rel=1e-14)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_leading_residue(p):
    params = make_params(p)
    value, _ = extract_residue(lambda z: epstein_inhomogeneous(params, z).value, p / 2)
    assert value.real == pytest.approx(leading_residue(params), rel=1e-6)


def test_pole_reporting():
    params = make_params(2)
    with pytest.raises(PoleError) as e:
        epstein_inhomogeneous(params, 1.0)
    assert e.value.residue.real == pytest.approx(leading_residue(params))
    near = epstein_inhomogeneous(params, 1.005)
    assert near.nearest_pole is not None
    assert near.nearest_pole.location == 1


def test_poles_listing():
    assert len(inhomogeneous_poles(make_params(2))) == 1
    odd = inhomogeneous_poles(make_params(3), count=4)
    assert [location for location, _ in odd] == [1.5, 0.5, -0.5, -1.5]
    assert odd[0][1] == pytest.approx(leading_residue(make_params(3)))


def test_value_at_zero_even_dimension():
    # zeta(0) = (2 pi)^{p/2} q^{p/2} (-1)^{p/2} / ((p/2)! sqrt(det A))
    params = make_params(2, q=0.8)
    expected = -2 * math.pi * 0.8 / math.sqrt(params.form.det)
    assert epstein_inhomogeneous(params, 0.0).value.real == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("p", [1, 3])
def test_value_at_zero_odd_dimension(p):
    assert abs(epstein_inhomogeneous(make_params(p), 0.0).value) < 1e-12


@pytest.mark.parametrize("matrix", [2 * np.eye(2), np.diag([40.0, 50.0]), 2 * np.eye(3)])
def test_q_to_zero_continuity(matrix):
    form = QuadraticFormSpec(matrix)
    s = 2 + 0.3j
    massless = epstein_massless_recursive(form, s).value
    # first order in q: d zeta / dq = -s Z(s + 1)
    slope = abs(s * epstein_massless_recursive(form, s + 1).value)
    gaps = []
    for q in (1e-2, 1e-3, 1e-4, 1e-5):
        massive = epstein_inhomogeneous(EpsteinParams(form, q=q), s, include_origin=False)
        gaps.append(abs(massive.value - massless))
        assert gaps[-1] == pytest.approx(q * slope, rel=0.05)
    assert gaps == sorted(gaps, reverse=True)


def test_q_to_zero_limit_of_wide_form():
    form = QuadraticFormSpec(np.diag([40.0, 50.0]))
    s = 2 + 0.3j
    massive = epstein_inhomogeneous(EpsteinParams(form, q=1e-5), s, include_origin=False)
    assert abs(massive.value - epstein_massless_recursive(form, s).value) <= 1e-6


def test_small_mass_expansion_matches_bessel_series():
    form = QuadraticFormSpec(2 * np.eye(2))
    q, s = 5e-3, 2 + 0.3j
    params = EpsteinParams(form, q=q)
    expanded = epstein_inhomogeneous(params, s, include_origin=False)
    subtracted = epstein_inhomogeneous(params, s).value - q ** (-s)
    assert expanded.value == pytest.approx(subtracted, rel=1e-9)


def test_square_lattice_closed_form():
    # sum' (n1^2 + n2^2)^{-2} = 4 zeta(2) beta(2)
    expected = 4 * math.pi ** 2 / 6 * CATALAN
    assert chowla_selberg_2d(1, 0, 1, 2).value.real == pytest.approx(expected, rel=1e-12)
    square = QuadraticFormSpec(2 * np.eye(2))
    assert epstein_massless_recursive(square, 2).value.real == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("p", [2, 3])
def test_massless_at_zero(p):
    form = QuadraticFormSpec(FORMS[p])
    assert epstein_massless_recursive(form, 0.0).value == pytest.approx(-1, abs=1e-9)


@pytest.mark.parametrize("matrix", [FORMS[3], 2 * np.eye(3), 2 * np.eye(2), np.diag([2.0, 1.0, 1.5, 3.0])])
def test_massless_at_zero_error_is_honest(matrix):
    # s = 0 is a regular point of the recursion, reached by circle averaging
    value = epstein_massless_recursive(QuadraticFormSpec(matrix), 0.0)
    assert abs(value.value + 1) <= value.err_estimate
    assert value.err_estimate < 1e-8


def test_massless_pole():
    form = QuadraticFormSpec(FORMS[3])
    with pytest.raises(PoleError) as e:
        epstein_massless_recursive(form, 1.5)
    assert e.value.residue.real == pytest.approx(
        (2 * math.pi) ** 1.5 / (math.sqrt(form.det) * gamma(1.5))
    )


@pytest.mark.parametrize("s", [1.7 + 0.4j, -0.8, 0.25 + 3j])
def test_chowla_selberg_matches_recursion(s):
    a, b, c = 1.3, 0.6, 0.9
    form = QuadraticFormSpec.from_coefficients(a, b, c)
    assert chowla_selberg_2d(a, b, c, s).value == pytest.approx(
        epstein_massless_recursive(form, s).value, rel=1e-10
    )


def test_chowla_selberg_residue():
    a, b, c = 1.0, -0.5, 2.0
    value, _ = extract_residue(lambda z: chowla_selberg_2d(a, b, c, z).value, 1.0)
    assert value.real == pytest.approx(2 * math.pi / math.sqrt(4 * a * c - b * b), rel=1e-8)
    with pytest.raises(PoleError):
        chowla_selberg_2d(a, b, c, 1)


@pytest.mark.parametrize("bad", [(0, 0, 1), (1, 3, 1), (-1, 0, 1)])
def test_binary_form_rejects(bad):
    with pytest.raises(DomainError):
        chowla_selberg_2d(*bad, 2.0)


@pytest.mark.parametrize("s", [0.3 + 1j, 2.5, -1.5 + 0.5j])
def test_2d_inhomogeneous_matches_general(s):
    a, b, c, q = 1.2, 0.3, 0.8, 0.6
    params = EpsteinParams(QuadraticFormSpec.from_coefficients(a, b, c), q=q)
    general = epstein_inhomogeneous(params, s, include_origin=False)
    assert epstein_2d_inhomogeneous(a, b, c, q, s).value == pytest.approx(general.value, rel=1e-9)


@pytest.mark.parametrize("q", [0.5, 2.0])
def test_2d_inhomogeneous_residue(q):
    a, b, c = 0.9, 0.4, 1.4
    value, _ = extract_residue(lambda z: epstein_2d_inhomogeneous(a, b, c, q, z).value, 1.0)
    assert value.real == pytest.approx(2 * math.pi / math.sqrt(4 * a * c - b * b), rel=1e-8)


def test_eval_1d_direct():
    a, q, s = 0.8, 1.3, 2.0
    n = np.arange(1, 200_001, dtype=float)
    direct = 2 * np.sum((a * n[::-1] ** 2 + q) ** (-s))
    assert eval_1d_inhomogeneous(a, q, s).value.real == pytest.approx(direct, rel=1e-11)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_eval_1d_nonpositive_integers(k):
    # the full-line zeta vanishes at s = -k, leaving minus the origin term
    q = 1.7
    assert eval_1d_inhomogeneous(0.6, q, -k).value.real == pytest.approx(-(q ** k), rel=1e-12)


def test_eval_1d_pole_at_minus_half():
    a, q = 1.0, 2.0
    with pytest.raises(PoleError) as e:
        eval_1d_inhomogeneous(a, q, -0.5)
    assert e.value.residue.real == pytest.approx(q / (2 * math.sqrt(a)))


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("s", [0.2 + 0.5j, 0.7 - 1.1j, 2.3 + 0.2j, -0.4 + 2j])
def test_reflection(p, s):
    left, right = epstein_reflection(QuadraticFormSpec(FORMS[p]), s)
    assert left.value == pytest.approx(right.value, rel=1e-9)


@pytest.mark.parametrize("z, t", [(0.0, 1.0), (0.3, 0.2), (0.1 + 0.2j, 3.0), (-0.7, 7.5)])
def test_jacobi_theta(z, t):
    left, right = jacobi_theta_check(z, t)
    assert left.value == pytest.approx(right.value, rel=1e-12)
    with pytest.raises(DomainError):
        jacobi_theta_check(z, -1.0)


def test_recurrence_decomposition():
    form = QuadraticFormSpec(FORMS[3])
    dec = recurrence_decomposition(form)
    B = form.matrix / 2
    rng = np.random.default_rng(3)
    for n in rng.integers(-5, 6, size=(10, 3)):
        m = n[list(dec.permutation)]
        first = dec.a * (m[0] + dec.b @ m[1:] / (2 * dec.a)) ** 2
        assert first + m[1:] @ dec.Delta_reduced @ m[1:] == pytest.approx(n @ B @ n)
    with pytest.raises(DomainError):
        recurrence_decomposition(QuadraticFormSpec([[1.0]]))


def test_complex_q_needs_real_s():
    with pytest.warns(ExperimentalWarning):
        params = EpsteinParams(QuadraticFormSpec(FORMS[2]), q=-0.2, experimental=True)
    with pytest.raises(DomainError):
        epstein_inhomogeneous(params, 2 + 1j)
