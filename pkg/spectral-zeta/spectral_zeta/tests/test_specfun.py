import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import bernoulli, comb, zeta as scipy_zeta

from spectral_zeta.common import DomainError, PoleError
from spectral_zeta.specfun import (
    ZETA_PRIME_AT_ZERO,
    bernoulli_number,
    bernoulli_polynomial,
    bessel_k,
    bessel_k_array,
    complex_gamma,
    digamma,
    divisor_sigma,
    divisor_sigma_table,
    hurwitz_zeta,
    log_gamma,
    riemann_zeta,
    riemann_zeta_prime,
)


def test_gamma():
    assert complex_gamma(5) == pytest.approx(24)
    assert complex_gamma(0.5) == pytest.approx(math.sqrt(math.pi))
    with pytest.raises(PoleError) as e:
        complex_gamma(-2)
    assert e.value.residue == pytest.approx(0.5)
    with pytest.raises(PoleError):
        digamma(0)
    # Gamma(200) overflows a double, its logarithm does not
    assert log_gamma(200) == pytest.approx(math.lgamma(200), rel=1e-14)
    assert cmath.exp(log_gamma(3 + 2j)) == pytest.approx(complex_gamma(3 + 2j), rel=1e-13)


@pytest.mark.parametrize("s", [2.0, 3.5, 1.1, 7.0])
def test_riemann_zeta_real(s):
    assert riemann_zeta(s).value.real == pytest.approx(scipy_zeta(s), rel=1e-12)


@pytest.mark.parametrize(
    "s, expected", [(0, -0.5), (-1, -1 / 12), (-2, 0.0), (-3, 1 / 120)]
)
def test_riemann_zeta_integers(s, expected):
    assert riemann_zeta(s).value == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("n", [1, 3, 5, 7, 11, 21])
def test_riemann_zeta_negative_odd_integers_exact(n):
    # zeta(-n) = -B_{n+1} / (n + 1) to the last bit
    expected = float(-bernoulli_number(n + 1) / (n + 1))
    assert riemann_zeta(-n).value == expected


def test_bernoulli_numbers():
    assert [bernoulli_number(k) for k in range(5)] == [1, Fraction(-1, 2), Fraction(1, 6), 0, Fraction(-1, 30)]
    assert bernoulli_number(20) == Fraction(-174611, 330)
    with pytest.raises(DomainError):
        bernoulli_number(-1)


def test_riemann_zeta_functional_equation():
    s = -3.3 + 2j
    reflected = riemann_zeta(1 - s).value
    factor = 2 ** s * math.pi ** (s - 1) * np.sin(np.pi * s / 2) * complex_gamma(1 - s)
    assert riemann_zeta(s).value == pytest.approx(factor * reflected, rel=1e-10)


NONTRIVIAL_ZEROS = [
    14.134725141734693,
    21.022039638771555,
    25.010857580145689,
    30.424876125859513,
    32.935061587739190,
    37.586178158825671,
    40.918719012147495,
    43.327073280914999,
    48.005150881167160,
    49.773832477672302,
]


@pytest.mark.parametrize("t", NONTRIVIAL_ZEROS)
def test_riemann_zeta_zeros(t):
    assert abs(riemann_zeta(0.5 + 1j * t).value) < 1e-10


OFF_AXIS = [
    0.5 + 3j,
    0.5 + 7.5j,
    2 + 30j,
    0.5 + 50j,
    -0.7 + 12j,
    0.9 + 4.9j,
    0.9 + 5.1j,
    -1.5 + 40j,
    -3.2 + 20j,
    # next to the trivial zero at -2 and next to -1
    -2 + 0.05j,
    -1.95 + 0.08j,
    -1.05 - 0.04j,
    0.3 + 0.2j,
]


@pytest.mark.parametrize("s", OFF_AXIS)
def test_riemann_zeta_off_axis(s):
    with mpmath.workdps(30):
        expected = complex(mpmath.zeta(mpmath.mpc(s.real, s.imag)))
    result = riemann_zeta(s)
    assert result.value == pytest.approx(expected, rel=1e-10, abs=1e-12)
    assert abs(result.value - expected) <= result.err_estimate + 1e-14 * abs(expected)


def test_riemann_zeta_pole():
    with pytest.raises(PoleError):
        riemann_zeta(1)
    near = riemann_zeta(1.005)
    assert near.nearest_pole is not None
    assert near.nearest_pole.residue == 1


def test_riemann_zeta_prime_at_zero():
    assert riemann_zeta_prime(0).value.real == pytest.approx(ZETA_PRIME_AT_ZERO, rel=1e-8)


def test_hurwitz_zeta():
    assert hurwitz_zeta(3, 0.5).value.real == pytest.approx(7 * scipy_zeta(3), rel=1e-12)
    assert hurwitz_zeta(2.5, 0.3).value.real == pytest.approx(scipy_zeta(2.5, 0.3), rel=1e-11)
    assert hurwitz_zeta(2 + 1j, 1.0).value == riemann_zeta(2 + 1j).value


@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_hurwitz_zeta_nonpositive_integers(n):
    c = 0.3
    expected = -bernoulli_polynomial(n + 1, c) / (n + 1)
    assert hurwitz_zeta(-n, c).value.real == pytest.approx(expected, rel=1e-14)


def test_hurwitz_zeta_rejects():
    with pytest.raises(DomainError):
        hurwitz_zeta(2, 0.0)
    with pytest.raises(PoleError):
        hurwitz_zeta(1, 0.5)


def test_bernoulli_polynomial():
    for x in (0.0, 0.25, 0.7):
        assert bernoulli_polynomial(2, x) == pytest.approx(x * x - x + 1 / 6)
    # Fourier branch against the power form
    n, x = 22, 0.3
    numbers = bernoulli(n)
    power = sum(comb(n, k, exact=True) * numbers[k] * x ** (n - k) for k in range(n + 1))
    assert bernoulli_polynomial(n, x) == pytest.approx(power, rel=1e-8)


def test_bessel_k_half_order():
    x = 1.7
    expected = math.sqrt(math.pi / (2 * x)) * math.exp(-x)
    assert bessel_k(0.5, x).value.real == pytest.approx(expected, rel=1e-14)


def test_bessel_k_complex_order():
    nu, x = 0.3 + 0.7j, 1.5
    # K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu
    lhs = bessel_k(nu + 1, x).value
    rhs = bessel_k(nu - 1, x).value + 2 * nu / x * bessel_k(nu, x).value
    assert lhs == pytest.approx(rhs, rel=1e-9)
    assert bessel_k(-nu, x).value == pytest.approx(bessel_k(nu, x).value, rel=1e-12)


def test_bessel_k_array_matches_scalar():
    nu = 1.2 - 0.4j
    x = np.array([0.5, 2.0, 10.0])
    values, errors = bessel_k_array(nu, x)
    for xi, v, e in zip(x, values, errors):
        scalar = bessel_k(nu, xi).value
        assert v == pytest.approx(scalar, rel=1e-9)
        assert e >= 0
    with pytest.raises(DomainError):
        bessel_k_array(nu, np.array([1.0, -1.0]))


def test_divisor_sigma_table():
    table = divisor_sigma_table(1, 12)
    for n in range(1, 13):
        assert table[n] == divisor_sigma(1, n)
    assert divisor_sigma(0, 12) == 6
    with pytest.raises(DomainError):
        divisor_sigma(1, 0)


@settings(max_examples=50)
@given(st.integers(1, 200), st.integers(1, 200))
def test_divisor_sigma_multiplicative(m, n):
    if math.gcd(m, n) != 1:
        return
    assert divisor_sigma(1, m * n) == pytest.approx(divisor_sigma(1, m) * divisor_sigma(1, n))
