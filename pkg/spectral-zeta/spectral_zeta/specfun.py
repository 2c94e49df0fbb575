"""Complex-argument special functions.

Gamma, Riemann and Hurwitz zeta, the modified Bessel function K of complex
order and positive real argument, and divisor sums. Every zeta-type
function returns a :class:`~spectral_zeta.common.ZetaValue`.
"""
from typing import Optional, Tuple

import functools
import math
from fractions import Fraction

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gamma, gammaln, kv, loggamma, psi, rgamma

from .analytic import derivative
from .common import (
    MACHINE_EPS,
    AccuracyTarget,
    DomainError,
    PoleError,
    ZetaValue,
    as_complex,
    as_real,
    pole_info,
    resolve_accuracy,
)

EULER_GAMMA = float(np.euler_gamma)
ZETA_PRIME_AT_ZERO = -0.5 * math.log(2 * math.pi)
BESSEL_ORDER_ENVELOPE = 200.0
BORWEIN_MAX_HEIGHT = 5.0

_EM_CORRECTIONS = 8
_BORWEIN_BASE = math.log(3 + math.sqrt(8))


def _is_nonpositive_integer(s: complex) -> bool:
    return s.imag == 0 and s.real <= 0 and s.real == math.floor(s.real)


def complex_gamma(s, log: bool = False) -> complex:
    """Gamma function of a complex argument.

    Parameters
    ----------
    s
        the argument
    log
        return the principal branch of ln Gamma(s) instead, which does not
        overflow for large |s|
    """
    s = as_complex(s)
    if _is_nonpositive_integer(s):
        n = int(-s.real)
        raise PoleError(s, (-1) ** n / math.factorial(n), "Gamma")
    if log:
        return complex(loggamma(s))
    return complex(gamma(s))


def log_gamma(s) -> complex:
    return complex_gamma(s, log=True)


def reciprocal_gamma(s) -> complex:
    """1/Gamma(s), an entire function (zero at the non-positive integers)."""
    return complex(rgamma(as_complex(s)))


def digamma(s) -> complex:
    s = as_complex(s)
    if _is_nonpositive_integer(s):
        raise PoleError(s, -1.0, "digamma")
    return complex(psi(s))


def bernoulli_polynomial(n: int, x: float) -> float:
    """B_n(x), by the Fourier series on [0, 1] for large ``n`` where the
    power form cancels catastrophically."""
    if n < 0:
        raise DomainError(f"Bernoulli polynomial order must be non-negative, got {n}")
    if n > 20 and 0 <= x <= 1:
        k = np.arange(1, 65, dtype=float)
        series = np.sum(np.cos(2 * np.pi * k * x - n * np.pi / 2) / k ** n)
        scale = math.exp(gammaln(n + 1) - n * math.log(2 * math.pi))
        return float(-2 * scale * series)
    return float(sum(math.comb(n, k) * float(bernoulli_number(k)) * x ** (n - k) for k in range(n + 1)))


@functools.lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """Exact B_n with B_1 = -1/2.

    >>> bernoulli_number(4), bernoulli_number(12)
    (Fraction(-1, 30), Fraction(-691, 2730))
    """
    if n < 0:
        raise DomainError(f"Bernoulli number index must be non-negative, got {n}")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2:
        return Fraction(0)
    total = sum(math.comb(n + 1, k) * bernoulli_number(k) for k in range(n))
    return -total / (n + 1)


# B_0 .. B_18 for the Euler-Maclaurin tail
_BERNOULLI = [float(bernoulli_number(k)) for k in range(19)]


def _zeta_at_nonpositive_integer(n: int) -> float:
    if n == 0:
        return -0.5
    if n % 2 == 0:
        return 0.0
    return float(-bernoulli_number(n + 1) / (n + 1))


def _euler_maclaurin(s: complex, c: float) -> Tuple[complex, float, int]:
    """sum_{k>=0} (k + c)^{-s} with N = 16 + ceil|s| explicit terms."""
    N = 16 + math.ceil(abs(s))
    k = np.arange(N, dtype=float) + c
    head = complex(np.sum(k ** (-s)))
    x = N + c
    tail = x ** (1 - s) / (s - 1) + 0.5 * x ** (-s)
    rising = s
    for j in range(1, _EM_CORRECTIONS + 1):
        tail += _BERNOULLI[2 * j] / math.factorial(2 * j) * rising * x ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    j = _EM_CORRECTIONS + 1
    omitted = abs(_BERNOULLI[2 * j] / math.factorial(2 * j) * rising * x ** (-s - 2 * j + 1))
    value = head + tail
    rounding = 10 * MACHINE_EPS * float(np.sum(np.abs(k ** (-s)))) + MACHINE_EPS * abs(value)
    return value, omitted + rounding, N + _EM_CORRECTIONS


def _borwein(s: complex, acc: AccuracyTarget) -> Tuple[complex, float, int]:
    t = abs(s.imag)
    # the error carries 1/|Gamma(s)|, which grows like e^{pi |t| / 2} along every vertical line
    log_bound = math.log(3 * (1 + 2 * t)) + max(0.0, -loggamma(s).real)
    n = math.ceil((log_bound - math.log(acc.rel_tol) + 2) / _BORWEIN_BASE)
    n = min(max(n, 8), 250)

    ratios = np.ones(n + 1)
    i = np.arange(n, dtype=float)
    ratios[1:] = 4 * (n + i) * (n - i) / ((2 * i + 1) * (2 * i + 2))
    d = np.cumsum(np.cumprod(ratios))
    k = np.arange(n, dtype=float)
    terms = (-1) ** k * (d[:n] - d[n]) * (k + 1) ** (-s)
    denominator = 1 - 2 ** (1 - s)
    eta = -complex(np.sum(terms)) / d[n]
    value = eta / denominator
    truncation = math.exp(log_bound - n * _BORWEIN_BASE)
    rounding = 10 * MACHINE_EPS * float(np.sum(np.abs(terms))) / d[n]
    return value, (truncation + rounding) / abs(denominator), n


def riemann_zeta(s, acc: Optional[AccuracyTarget] = None) -> ZetaValue:
    """Riemann zeta function continued to the whole plane.

    The alternating (Borwein) series is used for Re s >= 1/2 close to the real
    axis, the functional equation to the left of it, Euler-Maclaurin above
    |Im s| = 5 and where 1 - 2^{1-s} is small, and exact Bernoulli values at
    the non-positive integers.
    """
    s = as_complex(s)
    acc = resolve_accuracy(acc)
    if s == 1:
        raise PoleError(1, 1, "Riemann zeta")
    pole = pole_info(s, 1, 1)
    if _is_nonpositive_integer(s):
        value = _zeta_at_nonpositive_integer(int(-s.real))
        return ZetaValue(value, MACHINE_EPS * abs(value), nearest_pole=pole)
    if s.real < 0.5:
        reflected = riemann_zeta(1 - s, acc)
        log_factor = s * math.log(2) + (s - 1) * math.log(math.pi) + loggamma(1 - s)
        factor = np.exp(log_factor) * np.sin(np.pi * s / 2)
        value = factor * reflected.value
        err = abs(factor) * reflected.err_estimate + 10 * MACHINE_EPS * abs(s) * abs(value)
        return ZetaValue(value, err, nearest_pole=pole, terms_used=reflected.terms_used)
    if abs(s.imag) > BORWEIN_MAX_HEIGHT or abs(1 - 2 ** (1 - s)) < 0.1:
        value, err, terms = _euler_maclaurin(s, 1.0)
    else:
        value, err, terms = _borwein(s, acc)
    return ZetaValue(value, err, nearest_pole=pole, terms_used=terms)


def riemann_zeta_prime(s, acc: Optional[AccuracyTarget] = None) -> ZetaValue:
    """zeta'(s) by Richardson-extrapolated central differences."""
    s = as_complex(s)
    value, err = derivative(lambda z: riemann_zeta(z, acc), s, h=1e-2)
    return ZetaValue(value, err, nearest_pole=pole_info(s, 1, -1))


def hurwitz_zeta(s, c: float, acc: Optional[AccuracyTarget] = None) -> ZetaValue:
    """Hurwitz zeta sum_{n>=0} (n + c)^{-s}.

    Exact Bernoulli-polynomial values at the non-positive integers; c = 1
    delegates to :func:`riemann_zeta`.
    """
    s = as_complex(s)
    c = as_real(c, "c")
    if c <= 0:
        raise DomainError(f"Hurwitz parameter c must be positive, got {c}")
    if c == 1:
        return riemann_zeta(s, acc)
    if s == 1:
        raise PoleError(1, 1, "Hurwitz zeta")
    pole = pole_info(s, 1, 1)
    if _is_nonpositive_integer(s):
        n = int(-s.real)
        value = -bernoulli_polynomial(n + 1, c) / (n + 1)
        return ZetaValue(value, 10 * MACHINE_EPS * abs(value), nearest_pole=pole)
    value, err, terms = _euler_maclaurin(s, c)
    return ZetaValue(value, err, nearest_pole=pole, terms_used=terms)


def _bessel_cutoff(x: float, order_real: float, floor: float) -> float:
    """T with x (cosh T - 1) - |Re nu| T = -ln(floor)."""
    target = -math.log(floor)

    def excess(t):
        return x * (math.cosh(t) - 1) - order_real * t - target

    hi = 1.0
    while excess(hi) <= 0:
        hi *= 2
    return brentq(excess, 0.0, hi)


def bessel_k(nu, x, acc: Optional[AccuracyTarget] = None) -> ZetaValue:
    """Modified Bessel function K_nu(x) for complex order and real x > 0.

    Real orders use :func:`scipy.special.kv`. Complex orders integrate the
    exponentially scaled representation
    e^{-x} * int_0^T e^{-x (cosh t - 1)} cosh(nu t) dt
    adaptively, with T bounding the discarded tail by ``abs_floor``.
    """
    nu = as_complex(nu)
    x = as_real(x, "x")
    acc = resolve_accuracy(acc)
    if x <= 0:
        raise DomainError(f"Bessel argument must be positive, got {x}")
    if abs(nu.real) > BESSEL_ORDER_ENVELOPE:
        raise DomainError(f"|Re nu| must not exceed {BESSEL_ORDER_ENVELOPE}, got {nu}")
    if nu.imag == 0:
        value = float(kv(nu.real, x))
        return ZetaValue(value, 4 * MACHINE_EPS * abs(value), underflow=value == 0)

    a = abs(nu.real)
    T = _bessel_cutoff(x, a, acc.floor)

    def integrand(t, part):
        base = -x * (math.cosh(t) - 1)
        z = 0.5 * (np.exp(base + nu * t) + np.exp(base - nu * t))
        return z.real if part == 0 else z.imag

    re, err_re = quad(integrand, 0.0, T, args=(0,), epsrel=acc.rel_tol, epsabs=0, limit=500)
    im, err_im = quad(integrand, 0.0, T, args=(1,), epsrel=acc.rel_tol, epsabs=0, limit=500)
    slope = x * math.sinh(T) - a
    tail = acc.floor / slope if slope > 0 else acc.floor * T
    scale = math.exp(-x)
    value = scale * complex(re, im)
    return ZetaValue(
        value,
        scale * (err_re + err_im + tail),
        underflow=value == 0 and (re != 0 or im != 0),
    )


_CHUNK = 2048


def bessel_k_array(
    nu, x: np.ndarray, acc: Optional[AccuracyTarget] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized K_nu over an array of positive arguments.

    Used by the lattice series, where thousands of arguments share one order.
    Complex orders use the trapezoidal rule on the even, exponentially scaled
    integrand; the error estimate is the difference to the rule with twice
    the step. Returns values and per-element error estimates.
    """
    nu = as_complex(nu)
    acc = resolve_accuracy(acc)
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return np.zeros(0, dtype=complex), np.zeros(0)
    if np.any(x <= 0):
        raise DomainError("Bessel arguments must be positive")
    if nu.imag == 0:
        values = kv(nu.real, x)
        return values.astype(complex), 4 * MACHINE_EPS * np.abs(values)

    a = abs(nu.real)
    T = _bessel_cutoff(float(x.min()), a, acc.floor)
    h = min(0.1, 0.5 / math.sqrt(float(x.max())), 0.5 / (1 + abs(nu.imag)))
    nodes = np.arange(0.0, T + h, h)
    weights = np.full(nodes.shape, h)
    weights[0] = h / 2
    coarse = np.zeros(nodes.shape)
    coarse[::2] = 2 * h
    coarse[0] = h

    values = np.empty(x.shape, dtype=complex)
    errors = np.empty(x.shape)
    shifted = np.cosh(nodes) - 1
    for start in range(0, x.size, _CHUNK):
        block = x[start : start + _CHUNK]
        base = -np.outer(block, shifted)
        integrand = 0.5 * (np.exp(base + nu * nodes) + np.exp(base - nu * nodes))
        fine_sum = integrand @ weights
        coarse_sum = integrand @ coarse
        scale = np.exp(-block)
        values[start : start + _CHUNK] = scale * fine_sum
        errors[start : start + _CHUNK] = scale * (np.abs(fine_sum - coarse_sum) + acc.floor)
    return values, errors


def divisor_sigma(s, n: int) -> complex:
    """sigma_s(n) = sum of d^s over the divisors d of n, found by trial
    division up to sqrt(n).

    >>> divisor_sigma(1, 6)
    (12+0j)
    """
    s = as_complex(s)
    if int(n) != n or n < 1:
        raise DomainError(f"divisor_sigma needs a positive integer, got {n}")
    n = int(n)
    divisors = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            divisors.append(d)
            if d * d != n:
                divisors.append(n // d)
        d += 1
    divisors.sort()
    return complex(np.sum(np.power(np.array(divisors, dtype=float), s)))


def divisor_sigma_table(s, n_max: int) -> np.ndarray:
    """sigma_s(n) for n = 0 .. n_max by sieving (entry 0 is unused)."""
    s = as_complex(s)
    table = np.zeros(n_max + 1, dtype=complex)
    for d in range(1, n_max + 1):
        table[d::d] += float(d) ** s
    return table
