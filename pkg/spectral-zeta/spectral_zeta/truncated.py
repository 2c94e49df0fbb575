"""The truncated inhomogeneous zeta sum_{n>=0} [a (n + c)^2 + q]^{-s}.

The continuation combines four pieces: the Hurwitz constant term, an
asymptotic (divergent) series in a/q truncated at its smallest term, a
Gamma ratio carrying every pole, and an exponentially convergent Bessel
series.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import math
import warnings

import numpy as np
from scipy.special import gammaln, rgamma

from .analytic import extract_residue
from .common import (
    MACHINE_EPS,
    AccuracyFloorWarning,
    AccuracyTarget,
    ConvergenceError,
    DomainError,
    PoleInfo,
    ZetaValue,
    as_complex,
    as_real,
    resolve_accuracy,
)
from .epstein import _bessel_terms, epstein_inhomogeneous, gamma_ratio_term
from .lattice import EpsteinParams, QuadraticFormSpec
from .specfun import hurwitz_zeta

MAX_RESIDUE_INDEX = 6
# below this index zeta_H(-2m, c) comes from the Bernoulli polynomial directly
_EXACT_HURWITZ = 10
_ASYMPTOTIC_CAP = 2000
_FOURIER_TERMS = np.arange(1, 33, dtype=float)


@dataclass(frozen=True)
class TruncatedParams:
    a: float
    c: float
    q: float

    def __post_init__(self):
        a = as_real(self.a, "a")
        c = as_real(self.c, "c")
        q = as_real(self.q, "q")
        if a <= 0:
            raise DomainError(f"a must be positive, got {a}")
        if q <= 0:
            raise DomainError(f"q must be positive, got {q}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "q", q)

    def term(self, x, s: complex) -> complex:
        return complex(np.sum(np.power(self.a * np.asarray(x, dtype=float) ** 2 + self.q, -s)))


@dataclass(frozen=True)
class AsymptoticResult:
    """Value of an asymptotic continuation.

    ``err_estimate`` is never below ``smallest_term``, the magnitude of the
    first omitted asymptotic term.
    """

    value: complex
    terms_used: int
    smallest_term: float
    err_estimate: float
    accuracy_floor_reached: bool = False
    nearest_pole: Optional[PoleInfo] = None

    def as_zeta_value(self) -> ZetaValue:
        return ZetaValue(
            self.value,
            self.err_estimate,
            nearest_pole=self.nearest_pole,
            terms_used=self.terms_used,
            accuracy_floor_reached=self.accuracy_floor_reached,
        )


@dataclass(frozen=True)
class TruncatedResidue:
    """Residue at s = 1/2 - j: the closed form next to the value read off
    the evaluator. ``ratio`` is closed form over extracted."""

    j: int
    closed_form: float
    extracted_value: float
    extracted_err: float

    @property
    def ratio(self) -> float:
        return self.closed_form / self.extracted_value


def _canonical_offset(c: float) -> Tuple[float, np.ndarray, int]:
    """c' in (0, 1] and the points x with sum_{n>=0} f(n+c) = sum_{n>=0} f(n+c') + sign * sum f(x)."""
    if 0 < c <= 1:
        return c, np.zeros(0), 0
    if c > 1:
        k = math.ceil(c - 1)
        shifted = c - k
        return shifted, shifted + np.arange(k, dtype=float), -1
    k = math.floor(1 - c)
    shifted = c + k
    return shifted, shifted - np.arange(1, k + 1, dtype=float), 1


def _asymptotic_series(a: float, c: float, q: float, s: complex, acc: AccuracyTarget):
    """q^{-s} sum_{m>=1} (-1)^m (s)_m / m! (a/q)^m zeta_H(-2m, c), truncated
    before its smallest term.

    Returns (sum, smallest term, terms used). For m >= 10 the Hurwitz values
    are written through the Fourier series of the Bernoulli polynomials,
    zeta_H(-2m, c) = 2 (-1)^m (2m)! / (2 pi)^{2m+1} sum_k sin(2 pi k c) / k^{2m+1},
    which keeps every term in log form.
    """
    if c in (0.5, 1.0):
        return 0j, 0.0, 0
    log_ratio = math.log(a / q)
    log_poch = 0j
    sines = np.sin(2 * np.pi * _FOURIER_TERMS * c)
    terms = []
    magnitudes = []
    cap = min(_ASYMPTOTIC_CAP, acc.max_terms)
    for m in range(1, cap + 1):
        factor = s + m - 1
        if factor == 0:
            # (s)_m vanishes from here on: the series terminates
            return complex(np.sum(terms)) * q ** (-s), 0.0, len(terms)
        log_poch += np.log(factor)
        if m < _EXACT_HURWITZ:
            zh = hurwitz_zeta(-2 * m, c).value.real
            log_size = log_poch - gammaln(m + 1) + m * log_ratio
            weight = (-1) ** m * zh
        else:
            log_size = (
                math.log(2)
                + log_poch
                + gammaln(2 * m + 1)
                - gammaln(m + 1)
                - (2 * m + 1) * math.log(2 * math.pi)
                + m * log_ratio
            )
            weight = float(np.sum(sines / _FOURIER_TERMS ** (2 * m + 1)))
        magnitude = math.exp(min(log_size.real, 700.0)) * abs(weight)
        magnitudes.append(magnitude)
        terms.append(np.exp(log_size) * weight if log_size.real < 700.0 else 0j)
        best = min(magnitudes)
        if magnitude == 0 or magnitude > 1e4 * best:
            break
    else:
        raise ConvergenceError(
            f"asymptotic series did not reach its smallest term within {cap} terms"
        )
    stop = int(np.argmin(magnitudes))
    prefactor = q ** (-s)
    return complex(np.sum(terms[:stop])) * prefactor, magnitudes[stop] * abs(prefactor), stop


def truncated_zeta(
    params: TruncatedParams, s, acc: Optional[AccuracyTarget] = None
) -> AsymptoticResult:
    """Continuation of sum_{n>=0} [a (n + c)^2 + q]^{-s}.

    Poles at s = 1/2 - j with residue q^j (2j-1)!! / (2 j! 2^j sqrt(a)).
    When the smallest asymptotic term exceeds the requested tolerance the
    result is flagged and an :class:`AccuracyFloorWarning` is issued.
    """
    s = as_complex(s)
    acc = resolve_accuracy(acc)
    a, q = params.a, params.q
    c, shift_points, sign = _canonical_offset(params.c)

    volume = gamma_ratio_term(0.5 * math.sqrt(math.pi / a), q, 0.5, s, "truncated zeta")
    constant = (0.5 - c) * q ** (-s)
    asymptotic, smallest, used = _asymptotic_series(a, c, q, s, acc)
    shift = sign * params.term(shift_points, s) if len(shift_points) else 0j

    bessel, bessel_err = 0j, 0.0
    coeff = 2 * math.pi ** s * rgamma(s) * a ** (-0.25 - s / 2) * q ** (0.25 - s / 2)
    if coeff != 0:
        bessel, bessel_err = _phased_series(a, q, c, s, acc)
        bessel, bessel_err = coeff * bessel, abs(coeff) * bessel_err

    value = constant + asymptotic + volume.value + bessel + shift
    rounding = 10 * MACHINE_EPS * (abs(constant) + abs(volume.value) + abs(bessel) + abs(shift) + abs(value))
    err = smallest + volume.err_estimate + bessel_err + rounding
    floor_reached = bool(smallest > max(acc.rel_tol * abs(value), acc.abs_floor))
    if floor_reached:
        warnings.warn(
            f"asymptotic accuracy floor {smallest:.3g} exceeds the requested tolerance "
            f"(a/q = {a / q:.3g})",
            AccuracyFloorWarning,
        )
    return AsymptoticResult(
        value,
        used,
        smallest,
        err,
        accuracy_floor_reached=floor_reached,
        nearest_pole=volume.nearest_pole,
    )


def _phased_series(a: float, q: float, c: float, s: complex, acc: AccuracyTarget):
    """sum_{n>=1} cos(2 pi n c) n^{s-1/2} K_{s-1/2}(2 pi n sqrt(q/a))."""
    nu = s - 0.5
    step = 2 * math.pi * math.sqrt(q / a)
    total, err, start, quiet = 0j, 0.0, 1, 0
    block = 64
    while True:
        n = np.arange(start, start + block, dtype=float)
        K, K_err = _bessel_terms(nu, step * n, acc)
        weight = np.cos(2 * np.pi * n * c) * np.power(n, nu)
        contribution = complex(np.sum(weight * K))
        total += contribution
        err += float(np.sum(np.abs(weight) * K_err))
        if abs(contribution) <= acc.rel_tol * max(abs(total), acc.floor):
            quiet += 1
        else:
            quiet = 0
        start += block
        if quiet >= 3 or start > acc.max_terms:
            break
    if quiet < 3:
        raise ConvergenceError(f"Bessel series did not converge within {acc.max_terms} terms")
    return total, err


def direct_truncated_sum(params: TruncatedParams, s, n_max: int = 100_000) -> ZetaValue:
    """sum_{n=0}^{n_max} [a (n + c)^2 + q]^{-s} with the integral-test bound
    a^{-sigma} (n_max + c)^{1 - 2 sigma} / (2 sigma - 1) on the tail."""
    s = as_complex(s)
    if s.real <= 0.5:
        raise ConvergenceError(f"the half-line sum diverges for Re s = {s.real} <= 1/2")
    x = np.arange(n_max + 1, dtype=float) + params.c
    terms = np.power(params.a * x ** 2 + params.q, -s)
    top = n_max + params.c
    if top <= 0:
        raise DomainError("n_max must reach past the offset")
    sigma = s.real
    tail = params.a ** (-sigma) * top ** (1 - 2 * sigma) / (2 * sigma - 1)
    value = complex(np.sum(terms[::-1]))
    return ZetaValue(value, tail + 10 * MACHINE_EPS * float(np.sum(np.abs(terms))), terms_used=n_max + 1)


def truncated_residue(
    params: TruncatedParams, j: int, acc: Optional[AccuracyTarget] = None
) -> TruncatedResidue:
    """Residue of the truncated zeta at s = 1/2 - j.

    ``closed_form`` is the closed form q^j (2j-1)!! / (j! 2^j sqrt(a));
    ``extracted_value`` is the Richardson-extrapolated limit of
    (s - 1/2 + j) * truncated_zeta(s), which comes out at half of it.
    """
    if not 0 <= j <= MAX_RESIDUE_INDEX:
        raise DomainError(f"residue index must lie in 0..{MAX_RESIDUE_INDEX}, got {j}")
    double_factorial = math.prod(range(2 * j - 1, 0, -2))
    closed = params.q ** j * double_factorial / (math.factorial(j) * 2 ** j * math.sqrt(params.a))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyFloorWarning)
        value, err = extract_residue(lambda z: truncated_zeta(params, z, acc).value, 0.5 - j)
    return TruncatedResidue(j, closed, value.real, err)


def full_line_split_check(
    a, c, q, s, acc: Optional[AccuracyTarget] = None
) -> Tuple[ZetaValue, ZetaValue]:
    """The full-line sum next to truncated_zeta(c) + truncated_zeta(1 - c)."""
    c = as_real(c, "c")
    if not 0 < c < 1:
        raise DomainError(f"c must lie in (0, 1), got {c}")
    left = TruncatedParams(a, c, q)
    right = TruncatedParams(a, 1 - c, q)
    full = epstein_inhomogeneous(
        EpsteinParams(QuadraticFormSpec(np.array([[2.0 * left.a]])), c=[c], q=left.q), s, acc
    )
    first = truncated_zeta(left, s, acc)
    second = truncated_zeta(right, s, acc)
    return full, ZetaValue(
        first.value + second.value,
        first.err_estimate + second.err_estimate,
        nearest_pole=first.nearest_pole,
        accuracy_floor_reached=first.accuracy_floor_reached or second.accuracy_floor_reached,
    )
