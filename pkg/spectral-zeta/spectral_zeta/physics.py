"""Casimir energies on flat tori and zeta-regularized determinants.

The Casimir energy is E = zeta(-1/2) of the spectrum n^T g n + m^2, without
the conventional factor 1/2, which is left to the caller.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import math

import numpy as np
from scipy.special import gamma, kv, psi, rgamma

from .analytic import derivative
from .common import (
    MACHINE_EPS,
    AccuracyTarget,
    ConvergenceError,
    DomainError,
    ZetaValue,
    as_real,
    resolve_accuracy,
)
from .epstein import (
    _accumulate,
    _bessel_terms,
    _check_binary,
    epstein_bessel_series,
    epstein_massless_recursive,
    gamma_ratio_term,
)
from .lattice import MAX_DIMENSION, EpsteinParams, QuadraticFormSpec, enumerate_half_lattice
from .specfun import EULER_GAMMA, ZETA_PRIME_AT_ZERO, divisor_sigma_table

CASIMIR_POINT = -0.5


@dataclass(frozen=True, eq=False)
class TorusSpec:
    """Flat d-torus with metric g and a field of mass m."""

    g: np.ndarray
    m: float = 0.0

    def __post_init__(self):
        g = np.atleast_2d(np.array(self.g, dtype=float))
        if g.shape[0] > MAX_DIMENSION:
            raise DomainError(f"dimension must not exceed {MAX_DIMENSION}")
        m = as_real(self.m, "m")
        if m < 0:
            raise DomainError(f"mass must be non-negative, got {m}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "m", m)

    @property
    def d(self) -> int:
        return self.g.shape[0]

    @property
    def form(self) -> QuadraticFormSpec:
        return QuadraticFormSpec.from_metric(self.g)


@dataclass(frozen=True)
class TorusModuli2D:
    tau1: float
    tau2: float

    def __post_init__(self):
        if not as_real(self.tau2, "tau2") > 0:
            raise DomainError(f"tau2 must be positive, got {self.tau2}")

    @property
    def modulus_squared(self) -> float:
        return self.tau1 ** 2 + self.tau2 ** 2


@dataclass(frozen=True)
class CasimirEnergy:
    """Casimir energy of a torus.

    ``energy`` is the finite-size part: the Bessel series for m > 0, the
    full zeta(-1/2) for m = 0. ``full_zeta`` is zeta(-1/2) whenever that is
    finite, ``volume_term`` the mass-dependent bulk contribution for even d,
    and ``pole_residue`` the residue when s = -1/2 is a pole (m > 0, odd d).
    """

    energy: ZetaValue
    full_zeta: Optional[ZetaValue] = None
    volume_term: Optional[complex] = None
    pole_residue: Optional[complex] = None


def casimir_energy_torus(torus: TorusSpec, acc: Optional[AccuracyTarget] = None) -> CasimirEnergy:
    acc = resolve_accuracy(acc)
    form = torus.form
    if torus.m == 0:
        value = epstein_massless_recursive(form, CASIMIR_POINT, acc)
        return CasimirEnergy(value, full_zeta=value)

    params = EpsteinParams(form, q=torus.m ** 2)
    series = epstein_bessel_series(params, CASIMIR_POINT, acc)
    energy = series
    d = torus.d
    coeff = (2 * math.pi) ** (d / 2) / math.sqrt(form.det)
    if d % 2 == 1:
        j = (d + 1) // 2
        residue = coeff * params.q ** j * (-1) ** j / math.factorial(j) * rgamma(d / 2 - j)
        return CasimirEnergy(energy, pole_residue=residue)
    volume = gamma_ratio_term(coeff, params.q, d / 2, complex(CASIMIR_POINT), "Casimir volume term")
    full = ZetaValue(
        volume.value + series.value,
        volume.err_estimate + series.err_estimate,
        terms_used=series.terms_used,
    )
    return CasimirEnergy(energy, full_zeta=full, volume_term=volume.value)


def _local_derivative(params: EpsteinParams) -> float:
    p = params.p
    q = params.q
    root = math.sqrt(params.form.det)
    if p % 2 == 1:
        return (2 * math.pi) ** (p / 2) * gamma(-p / 2) * q ** (p / 2) / root
    k = p // 2
    return (-1) ** k * (2 * math.pi) ** k * q ** k / (math.factorial(k) * root) * (psi(k + 1) + EULER_GAMMA - math.log(q))


def zeta_prime_zero_pd(params: EpsteinParams, acc: Optional[AccuracyTarget] = None) -> ZetaValue:
    """zeta'_{A,c,q}(0), origin included, for q > 0.

    The Bessel part is 4 (2q)^{p/4} / sqrt(det A) times the half-lattice sum of
    cos(2 pi m.c) M^{-p/4} K_{p/2}(2 pi sqrt(2 q M)), M = m^T A^{-1} m; the
    local part depends on the parity of p.
    """
    acc = resolve_accuracy(acc)
    if isinstance(params.q, complex) or params.q <= 0:
        raise DomainError(f"q must be positive, got {params.q}")
    p, q = params.p, params.q
    local = _local_derivative(params)
    coeff = 4 * (2 * q) ** (p / 4) / math.sqrt(params.form.det)

    def shells():
        r = 1
        while True:
            m = enumerate_half_lattice(p, r)
            M = params.form.dual_value(m)
            K, K_err = _bessel_terms(complex(p / 2), 2 * np.pi * np.sqrt(2 * q * M), acc)
            weight = coeff * np.cos(2 * np.pi * (m @ params.c)) * M ** (-p / 4)
            yield complex(np.sum(weight * K)), float(np.sum(np.abs(weight) * K_err)), len(m)
            r += 1

    total, err, terms, used = _accumulate(shells(), local, acc)
    value = local + total.real
    return ZetaValue(value, err + 10 * MACHINE_EPS * (abs(local) + abs(value)), terms_used=terms, shells_used=used)


@dataclass(frozen=True)
class DeterminantValue:
    """det_zeta as its logarithm, which stays representable when the
    determinant itself over- or underflows."""

    log_value: float
    err_estimate: float

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def log_det_torus(
    params: EpsteinParams, acc: Optional[AccuracyTarget] = None, include_origin: bool = True
) -> DeterminantValue:
    """ln det_zeta = -zeta'(0); without the origin the n = 0 eigenvalue
    Q(c) + q is divided out."""
    prime = zeta_prime_zero_pd(params, acc)
    log_value = -prime.value.real
    if not include_origin:
        log_value -= math.log(params.origin_base.real)
    return DeterminantValue(log_value, prime.err_estimate)


def _terms_needed(rate: float, acc: AccuracyTarget) -> np.ndarray:
    """n = 1..N with e^{-rate N} below the tolerance."""
    N = max(1, int(math.ceil((-math.log(acc.rel_tol) + 10) / rate)))
    if N > acc.max_terms:
        raise ConvergenceError(f"series needs {N} terms, above max_terms = {acc.max_terms}")
    return np.arange(1, N + 1, dtype=float)


def det_torus_2d(a, b, c, q, acc: Optional[AccuracyTarget] = None) -> DeterminantValue:
    """det_zeta of the spectrum a n1^2 + b n1 n2 + c n2^2 + q over n != 0.

    q > 0:
        (1/q) exp(2 pi q (1 - ln q) / sqrt(Delta)) (1 - e^{-2 pi sqrt(q/a)})^2
        exp{-4 sum_n n^{-1} [sqrt(q/a) K_1(4 pi n sqrt(aq/Delta))
                             + cos(pi n b/a) sum_{d|n} d e^{-(pi n/a) sqrt(Delta + 4aq/d^2)}]}
    q = 0:
        (1/a) exp[-4 zeta'(0) - pi sqrt(Delta)/(6a)
                  - 4 sum_n sigma_1(n)/n cos(pi n b/a) e^{-pi n sqrt(Delta)/a}]
    with Delta = 4ac - b^2.
    """
    a, b, c, delta = _check_binary(a, b, c)
    q = as_real(q, "q")
    acc = resolve_accuracy(acc)
    if q < 0:
        raise DomainError(f"q must be non-negative, got {q}")
    root = math.sqrt(delta)

    if q == 0:
        n = _terms_needed(math.pi * root / a, acc)
        sigma = divisor_sigma_table(1, len(n))[1:].real
        series = np.sum(sigma / n * np.cos(math.pi * n * b / a) * np.exp(-math.pi * n * root / a))
        log_value = -math.log(a) - 4 * ZETA_PRIME_AT_ZERO - math.pi * root / (6 * a) - 4 * series
        return DeterminantValue(float(log_value), 10 * MACHINE_EPS * (abs(log_value) + 4 * float(np.sum(sigma / n))))

    head = -math.log(q) + 2 * math.pi * q * (1 - math.log(q)) / root + 2 * math.log1p(-math.exp(-2 * math.pi * math.sqrt(q / a)))
    n = _terms_needed(4 * math.pi * math.sqrt(a * q) / root, acc)
    bessel = math.sqrt(q / a) * np.sum(kv(1, 4 * math.pi * n * math.sqrt(a * q / delta)) / n)

    N = len(_terms_needed(math.pi * root / a, acc))
    divisor = 0.0
    for d in range(1, N + 1):
        k = np.arange(1, N // d + 1, dtype=float)
        nn = d * k
        divisor += float(np.sum(np.cos(math.pi * nn * b / a) * d * np.exp(-(math.pi * nn / a) * math.sqrt(delta + 4 * a * q / d ** 2)) / nn))
    log_value = head - 4 * (bessel + divisor)
    return DeterminantValue(float(log_value), 10 * MACHINE_EPS * (abs(head) + 4 * abs(bessel) + 4 * abs(divisor)))


def det_torus_teichmuller(moduli: TorusModuli2D, acc: Optional[AccuracyTarget] = None) -> DeterminantValue:
    """tau2 / (4 pi^2 |tau|^2) exp[-4 zeta'(0) - pi tau2 / (3 |tau|^2)
    - 4 sum_n sigma_1(n)/n cos(2 pi n tau1/|tau|^2) e^{-pi n tau2/|tau|^2}].

    The error estimate is twice the first omitted term, bounded with
    sigma_1(n) <= n (1 + ln n).
    """
    acc = resolve_accuracy(acc)
    t1, t2 = float(moduli.tau1), float(moduli.tau2)
    mod2 = moduli.modulus_squared
    rate = math.pi * t2 / mod2
    n = _terms_needed(rate, acc)
    sigma = divisor_sigma_table(1, len(n))[1:].real
    series = np.sum(sigma / n * np.cos(2 * math.pi * n * t1 / mod2) * np.exp(-rate * n))
    log_value = math.log(t2 / (4 * math.pi ** 2 * mod2)) - 4 * ZETA_PRIME_AT_ZERO - math.pi * t2 / (3 * mod2) - 4 * series
    nxt = len(n) + 1
    tail = 2 * 4 * (1 + math.log(nxt)) * math.exp(-rate * nxt)
    return DeterminantValue(float(log_value), tail + 10 * MACHINE_EPS * abs(log_value))


def log_det_by_differentiation(fn: Callable[[complex], ZetaValue], h: float = 1e-3) -> DeterminantValue:
    """-zeta'(0) from Richardson-extrapolated central differences of an evaluator."""
    value, err = derivative(fn, 0.0, h=h)
    return DeterminantValue(-value.real, err)
