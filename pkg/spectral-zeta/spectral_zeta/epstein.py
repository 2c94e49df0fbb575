"""Epstein zeta functions continued to the whole complex plane.

Conventions
-----------
``EpsteinParams`` describe zeta_{A,c,q}(s) = sum_{n in Z^p} [Q(n + c) + q]^{-s}
with Q(n) = 1/2 n^T A n, the origin included. Internally the homogeneous
recursion works with the matrix B = A/2 of Q written as n^T B n, which is
the form in which the two-dimensional closed expressions are stated
(B = [[a, b/2], [b/2, c]]).
"""
from collections import deque
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import math

import numpy as np
from scipy.special import gamma, kv, polygamma, rgamma

from .analytic import NEAR_POLE_RADIUS, evaluate_with_poles
from .common import (
    MACHINE_EPS,
    AccuracyTarget,
    ConvergenceError,
    DomainError,
    PoleError,
    ZetaValue,
    as_complex,
    as_real,
    pole_info,
    resolve_accuracy,
)
from .lattice import EpsteinParams, QuadraticFormSpec, enumerate_half_lattice
from .specfun import bessel_k_array, divisor_sigma_table, riemann_zeta

# e^{-700} is at the edge of the double range
_X_UNDERFLOW = 700.0
_BLOCK = 64
# q / min Q below which the origin-free zeta is expanded in powers of q
SMALL_MASS_RATIO = 1e-2


@dataclass(frozen=True, eq=False)
class RecurrenceDecomposition:
    """Splitting of n^T B n off its first coordinate.

    n^T B n = a (n1 + b.n2 / (2a))^2 + n2^T Delta_reduced n2 with
    ``b`` the doubled first column below the diagonal and
    ``Delta_reduced = A_reduced - b b^T / (4a)`` the Schur complement.
    ``permutation`` is the coordinate order applied before splitting.
    """

    a: float
    b: np.ndarray
    A_reduced: np.ndarray
    Delta_reduced: np.ndarray
    permutation: Tuple[int, ...]


def _largest_diagonal_first(B: np.ndarray) -> Tuple[np.ndarray, Tuple[int, ...]]:
    k = int(np.argmax(np.diag(B)))
    order = (k,) + tuple(i for i in range(B.shape[0]) if i != k)
    return B[np.ix_(order, order)], order


def _decompose(B: np.ndarray) -> RecurrenceDecomposition:
    B, order = _largest_diagonal_first(B)
    a = float(B[0, 0])
    b = 2.0 * B[1:, 0]
    A_reduced = B[1:, 1:]
    Delta = A_reduced - np.outer(b, b) / (4 * a)
    Delta = 0.5 * (Delta + Delta.T)
    return RecurrenceDecomposition(a, b, A_reduced, Delta, order)


def recurrence_decomposition(form: QuadraticFormSpec) -> RecurrenceDecomposition:
    """Decomposition of Q(n) = n^T (A/2) n used by the massless recursion."""
    if form.p < 2:
        raise DomainError("the recursion needs at least two dimensions")
    return _decompose(form.matrix / 2)


def _bessel_terms(nu: complex, x: np.ndarray, acc: AccuracyTarget):
    values = np.zeros(x.shape, dtype=complex)
    errors = np.zeros(x.shape)
    if np.iscomplexobj(x):
        if nu.imag != 0:
            raise DomainError("complex q needs a real exponent s")
        live = np.abs(x) < _X_UNDERFLOW
        values[live] = kv(nu.real, x[live])
        errors[live] = 4 * MACHINE_EPS * np.abs(values[live])
        return values, errors
    live = x < _X_UNDERFLOW
    if np.any(live):
        values[live], errors[live] = bessel_k_array(nu, x[live], acc)
    return values, errors


def _bessel_cut(nu: complex, acc: AccuracyTarget) -> float:
    """Argument beyond which K_nu(x) terms are negligible."""
    return -math.log(acc.rel_tol) + 12 + 2 * abs(nu)


def _accumulate(
    blocks: Iterator[Tuple[complex, float, int]], reference: complex, acc: AccuracyTarget
) -> Tuple[complex, float, int, int]:
    """Sum series blocks until three consecutive blocks are negligible."""
    total = 0j
    err = 0.0
    terms = 0
    used = 0
    quiet = 0
    recent: deque = deque(maxlen=3)
    for contribution, block_err, count in blocks:
        total += contribution
        err += block_err
        terms += count
        used += 1
        recent.append(abs(contribution))
        if terms > acc.max_terms:
            raise ConvergenceError(
                f"series did not converge within max_terms = {acc.max_terms}"
            )
        if abs(contribution) < acc.rel_tol * max(abs(reference + total), acc.floor):
            quiet += 1
        else:
            quiet = 0
        if quiet >= 3:
            break
    return total, err + sum(recent), terms, used


def gamma_ratio_term(coeff: float, q: complex, shift: float, s: complex, what: str) -> ZetaValue:
    """coeff * q^{shift - s} Gamma(s - shift) / Gamma(s).

    Simple poles at s = shift - j unless 1/Gamma vanishes there. Next to the
    leading pole s = shift the Gamma ratio is deflated analytically.
    """
    log_q = np.log(q)

    def raw(z):
        value = coeff * np.exp((shift - z) * log_q) * gamma(z - shift) * rgamma(z)
        return ZetaValue(value, 10 * MACHINE_EPS * abs(value))

    poles = []
    removable = []
    j0 = max(0, int(round(shift - s.real)))
    for j in range(max(0, j0 - 1), j0 + 2):
        location = shift - j
        inverse = rgamma(location)
        if inverse == 0:
            removable.append(location)
        else:
            poles.append((location, coeff * q ** j * (-1) ** j / math.factorial(j) * inverse))

    eps = s - shift
    if eps != 0 and abs(eps) < NEAR_POLE_RADIUS:
        residue = coeff * rgamma(shift)
        increment = -log_q
        for k in range(1, 8):
            increment += (polygamma(k - 1, 1.0) - polygamma(k - 1, shift)) * eps ** (k - 1) / math.factorial(k)
        delta = increment * eps
        factor = np.expm1(delta) / delta if delta != 0 else 1.0
        regular = residue * increment * factor
        value = residue / eps + regular
        return ZetaValue(
            value,
            10 * MACHINE_EPS * (abs(residue / eps) + abs(regular)),
            nearest_pole=pole_info(s, shift, residue),
        )
    return evaluate_with_poles(raw, s, poles, removable, what)


def inhomogeneous_poles(params: EpsteinParams, count: int = 6) -> List[Tuple[float, complex]]:
    """The first ``count`` poles s = p/2 - j of zeta_{A,c,q} with residues."""
    coeff = (2 * math.pi) ** (params.p / 2) / math.sqrt(params.form.det)
    poles = []
    j = 0
    while len(poles) < count:
        location = params.p / 2 - j
        inverse = rgamma(location)
        if inverse != 0:
            poles.append(
                (location, coeff * params.q ** j * (-1) ** j / math.factorial(j) * inverse)
            )
        elif params.p % 2 == 0:
            break
        j += 1
    return poles


def _inhomogeneous_series(params: EpsteinParams, q, s: complex, reference: complex, acc):
    p = params.p
    nu = s - p / 2
    coeff = (
        2 ** (s / 2 + p / 4 + 2)
        * math.pi ** s
        * q ** (p / 4 - s / 2)
        / math.sqrt(params.form.det)
        * rgamma(s)
    )
    if coeff == 0:
        return ZetaValue(0.0)
    exponent = s / 2 - p / 4

    def shells():
        r = 1
        while True:
            m = enumerate_half_lattice(p, r)
            M = params.form.dual_value(m)
            x = 2 * np.pi * np.sqrt(2 * q * M)
            K, K_err = _bessel_terms(nu, x, acc)
            phase = np.cos(2 * np.pi * (m @ params.c))
            weight = phase * np.power(M, exponent)
            terms = coeff * weight * K
            yield complex(np.sum(terms)), float(np.sum(np.abs(coeff * weight) * K_err)), len(m)
            r += 1

    total, err, terms, used = _accumulate(shells(), reference, acc)
    return ZetaValue(total, err, terms_used=terms, shells_used=used)


def _mass_term(params: EpsteinParams):
    if params.q == 0:
        raise DomainError("q = 0: use epstein_massless_recursive")
    return params.q if not isinstance(params.q, complex) and params.q > 0 else complex(params.q)


def epstein_bessel_series(
    params: EpsteinParams, s, acc: Optional[AccuracyTarget] = None, reference: complex = 0j
) -> ZetaValue:
    """The half-lattice Bessel series of zeta_{A,c,q}(s), an entire function
    of s. Summation stops once three shells are below rel_tol relative to
    ``reference`` plus the accumulated series."""
    return _inhomogeneous_series(
        params, _mass_term(params), as_complex(s), reference, resolve_accuracy(acc)
    )


def epstein_parts(
    params: EpsteinParams, s, acc: Optional[AccuracyTarget] = None
) -> Tuple[ZetaValue, ZetaValue]:
    """The volume term (2 pi)^{p/2} q^{p/2-s} Gamma(s-p/2) / (sqrt(det A) Gamma(s))
    and the half-lattice Bessel series of zeta_{A,c,q}(s), origin included."""
    s = as_complex(s)
    q = _mass_term(params)
    coeff = (2 * math.pi) ** (params.p / 2) / math.sqrt(params.form.det)
    volume = gamma_ratio_term(coeff, q, params.p / 2, s, "inhomogeneous Epstein zeta")
    return volume, epstein_bessel_series(params, s, acc, volume.value)


def _small_mass_applies(params: EpsteinParams, s: complex) -> bool:
    if isinstance(params.q, complex) or np.any(params.c != 0):
        return False
    return s.real > params.p / 2 and 0 < params.q <= SMALL_MASS_RATIO * _lowest_form_value(params)


def _lowest_form_value(params: EpsteinParams) -> float:
    # Q(n) >= lambda_min |n|^2 / 2 >= lambda_min / 2 on the punctured lattice
    return 0.5 * float(params.form.eigenvalues[0])


def _small_mass_series(params: EpsteinParams, s: complex, acc: AccuracyTarget) -> ZetaValue:
    """sum_{j>=0} (-1)^j (s)_j / j! q^j Z(s + j), Z the massless zeta.

    Valid with the origin excluded and c = 0; the ratio of consecutive terms
    is at most |s + j| / (j + 1) * q / min Q.
    """
    B = params.form.matrix / 2
    q = params.q
    total, err, terms = 0j, 0.0, 0
    coeff = 1 + 0j
    pole = None
    for j in range(acc.max_terms):
        if j:
            coeff *= -(s + j - 1) / j * q
        massless = _massless(B, s + j, acc)
        if not j:
            pole = massless.nearest_pole
        term = coeff * massless.value
        total += term
        err += abs(coeff) * massless.err_estimate
        terms += massless.terms_used
        if j and abs(term) < acc.rel_tol * abs(total):
            return ZetaValue(
                total,
                err + 2 * abs(term) + 10 * MACHINE_EPS * abs(total),
                nearest_pole=pole,
                terms_used=terms,
            )
    raise ConvergenceError(f"small-mass expansion did not converge within {acc.max_terms} terms")


def epstein_inhomogeneous(
    params: EpsteinParams,
    s,
    acc: Optional[AccuracyTarget] = None,
    include_origin: bool = True,
) -> ZetaValue:
    """zeta_{A,c,q}(s) for q > 0 on the whole complex plane.

    The only poles are s = p/2 - j (where 1/Gamma(p/2 - j) does not vanish),
    the leading one with residue (2 pi)^{p/2} / (sqrt(det A) Gamma(p/2)).
    With ``include_origin=False`` the n = 0 term [Q(c) + q]^{-s} is removed;
    for c = 0 and q below a hundredth of min Q the value then comes from the
    expansion in powers of q around the massless zeta, which avoids
    subtracting q^{-s}.
    """
    s = as_complex(s)
    if not include_origin and _small_mass_applies(params, s):
        return _small_mass_series(params, s, resolve_accuracy(acc))
    volume, series = epstein_parts(params, s, acc)
    value = volume.value + series.value
    err = volume.err_estimate + series.err_estimate
    if not include_origin:
        origin = params.origin_base ** (-s)
        value -= origin
        err += MACHINE_EPS * abs(origin)
    return ZetaValue(
        value,
        err + MACHINE_EPS * abs(value),
        nearest_pole=volume.nearest_pole,
        terms_used=series.terms_used,
        shells_used=series.shells_used,
    )


def _line_series(a: float, q: float, s: complex, reference: complex, acc: AccuracyTarget):
    """sum_{n>=1} n^{s-1/2} K_{s-1/2}(2 pi n sqrt(q/a))."""
    nu = s - 0.5
    step = 2 * math.pi * math.sqrt(q / a)

    def blocks():
        start = 1
        while True:
            n = np.arange(start, start + _BLOCK, dtype=float)
            K, K_err = _bessel_terms(nu, step * n, acc)
            weight = np.power(n, nu)
            yield complex(np.sum(weight * K)), float(np.sum(np.abs(weight) * K_err)), _BLOCK
            start += _BLOCK

    return _accumulate(blocks(), reference, acc)


def eval_1d_inhomogeneous(a, q, s, acc: Optional[AccuracyTarget] = None) -> ZetaValue:
    """2 sum_{n>=1} (a n^2 + q)^{-s} on the whole complex plane.

    Poles at s = 1/2 - j with residue q^j (2j-1)!! / (j! 2^j sqrt(a)).
    """
    a = as_real(a, "a")
    q = as_real(q, "q")
    s = as_complex(s)
    acc = resolve_accuracy(acc)
    if a <= 0 or q <= 0:
        raise DomainError(f"a and q must be positive, got a={a}, q={q}")
    volume = gamma_ratio_term(math.sqrt(math.pi / a), q, 0.5, s, "one-dimensional zeta")
    head = volume.value - q ** (-s)
    coeff = 4 * math.pi ** s * rgamma(s) * a ** (-0.25 - s / 2) * q ** (0.25 - s / 2)
    if coeff == 0:
        series, err, terms = 0j, 0.0, 0
    else:
        total, err, terms, _ = _line_series(a, q, s, head / coeff, acc)
        series, err = coeff * total, abs(coeff) * err
    value = head + series
    return ZetaValue(
        value,
        volume.err_estimate + err + 10 * MACHINE_EPS * (abs(value) + q ** (-s.real)),
        nearest_pole=volume.nearest_pole,
        terms_used=terms,
    )


def _ladder_point(p: int, s: complex) -> List[float]:
    """The point (p - k)/2, k >= 1, closest to s."""
    k = max(1, int(round(p - 2 * s.real)))
    return [(p - k) / 2]


def _massless(B: np.ndarray, s: complex, acc: AccuracyTarget) -> ZetaValue:
    """sum' (n^T B n)^{-s} with pole bookkeeping at every recursion level."""
    p = B.shape[0]
    residue = math.pi ** (p / 2) / (math.sqrt(np.linalg.det(B)) * gamma(p / 2))
    removable = _ladder_point(p, s) if p > 1 else []
    return evaluate_with_poles(
        lambda z: _massless_raw(B, z, acc),
        s,
        poles=[(p / 2, residue)],
        removable=removable,
        what="Epstein zeta",
    )


def _massless_raw(B: np.ndarray, s: complex, acc: AccuracyTarget) -> ZetaValue:
    p = B.shape[0]
    if p == 1:
        zeta = riemann_zeta(2 * s, acc)
        factor = 2 * B[0, 0] ** (-s)
        return ZetaValue(factor * zeta.value, abs(factor) * zeta.err_estimate, terms_used=zeta.terms_used)

    dec = _decompose(B)
    a, b, Delta = dec.a, dec.b, dec.Delta_reduced
    zeta = riemann_zeta(2 * s, acc)
    first = 2 * a ** (-s) * zeta.value
    inner_factor = math.sqrt(math.pi / a) * gamma(s - 0.5) * rgamma(s)
    if inner_factor == 0:
        inner = ZetaValue(0.0)
    else:
        inner = _massless(Delta, s - 0.5, acc)
    second = inner_factor * inner.value
    head = first + second

    coeff = 8 * math.pi ** s * a ** (-s / 2 - 0.25) * rgamma(s)
    nu = s - 0.5
    cut = _bessel_cut(nu, acc)

    def shells():
        r = 1
        while True:
            n2 = enumerate_half_lattice(p - 1, r)
            D = np.einsum("ij,jk,ik->i", n2, Delta, n2)
            scale = 2 * np.pi * np.sqrt(D / a)
            N1 = max(1, int(math.ceil(cut / scale.min())))
            n1 = np.arange(1, N1 + 1, dtype=float)
            x = np.outer(scale, n1)
            K, K_err = _bessel_terms(nu, x.ravel(), acc)
            K, K_err = K.reshape(x.shape), K_err.reshape(x.shape)
            phase = np.cos(np.pi * np.outer((n2 @ b) / a, n1))
            weight = phase * np.power(n1, nu)[None, :] * np.power(D, 0.25 - s / 2)[:, None]
            yield (
                complex(coeff * np.sum(weight * K)),
                float(abs(coeff) * np.sum(np.abs(weight) * K_err)),
                x.size,
            )
            r += 1

    if coeff == 0:
        third, err, terms = 0j, 0.0, 0
    else:
        third, err, terms, _ = _accumulate(shells(), head, acc)
    value = head + third
    return ZetaValue(
        value,
        2 * abs(a ** (-s)) * zeta.err_estimate
        + abs(inner_factor) * inner.err_estimate
        + err
        + 10 * MACHINE_EPS * (abs(first) + abs(second) + abs(value)),
        terms_used=terms + inner.terms_used + zeta.terms_used,
    )


def epstein_massless_recursive(
    form: QuadraticFormSpec, s, acc: Optional[AccuracyTarget] = None
) -> ZetaValue:
    """zeta_{A,0,0}(s) = sum_{n != 0} Q(n)^{-s} by the dimensional recursion.

    The only pole is s = p/2 with residue (2 pi)^{p/2} / (sqrt(det A) Gamma(p/2));
    the remaining points (p - k)/2 of the ladder are regular and evaluated
    by circle averaging.
    """
    s = as_complex(s)
    return _massless(form.matrix / 2, s, resolve_accuracy(acc))


def _check_binary(a, b, c) -> Tuple[float, float, float, float]:
    a, b, c = as_real(a, "a"), as_real(b, "b"), as_real(c, "c")
    if a <= 0 or c <= 0:
        raise DomainError(f"a and c must be positive, got a={a}, c={c}")
    delta = 4 * a * c - b * b
    if delta <= 0:
        raise DomainError(f"discriminant 4ac - b^2 = {delta} must be positive")
    return a, b, c, delta


def _chowla_selberg_raw(a, b, delta, s, acc) -> ZetaValue:
    zeta2s = riemann_zeta(2 * s, acc)
    zeta2s1 = riemann_zeta(2 * s - 1, acc)
    first = 2 * zeta2s.value * a ** (-s)
    factor = 2 ** (2 * s) * math.sqrt(math.pi) * a ** (s - 1) * gamma(s - 0.5) * rgamma(s) * delta ** (0.5 - s)
    second = factor * zeta2s1.value
    coeff = 2 ** (s + 2.5) * math.pi ** s * rgamma(s) * delta ** (0.25 - s / 2) / math.sqrt(a)
    nu = s - 0.5
    step = math.pi * math.sqrt(delta) / a
    N = max(1, int(math.ceil(_bessel_cut(nu, acc) / step)))
    if N > acc.max_terms:
        raise ConvergenceError(f"{N} divisor-series terms exceed max_terms")
    third, err = 0j, 0.0
    if coeff != 0:
        n = np.arange(1, N + 1, dtype=float)
        sigma = divisor_sigma_table(1 - 2 * s, N)[1:]
        K, K_err = _bessel_terms(nu, step * n, acc)
        weight = np.power(n, nu) * sigma * np.cos(np.pi * n * b / a)
        third = complex(coeff * np.sum(weight * K))
        err = float(abs(coeff) * np.sum(np.abs(weight) * K_err))
    value = first + second + third
    return ZetaValue(
        value,
        2 * abs(a ** (-s)) * zeta2s.err_estimate
        + abs(factor) * zeta2s1.err_estimate
        + err
        + 10 * MACHINE_EPS * (abs(first) + abs(second) + abs(value)),
        terms_used=N,
    )


def chowla_selberg_2d(a, b, c, s, acc: Optional[AccuracyTarget] = None) -> ZetaValue:
    """sum' (a n1^2 + b n1 n2 + c n2^2)^{-s}, pole at s = 1 with residue
    2 pi / sqrt(4ac - b^2)."""
    a, b, c, delta = _check_binary(a, b, c)
    s = as_complex(s)
    acc = resolve_accuracy(acc)
    removable = [0.5 - max(0, int(round(0.5 - s.real)))]
    return evaluate_with_poles(
        lambda z: _chowla_selberg_raw(a, b, delta, z, acc),
        s,
        poles=[(1.0, 2 * math.pi / math.sqrt(delta))],
        removable=removable,
        what="Chowla-Selberg zeta",
    )


def epstein_2d_inhomogeneous(a, b, c, q, s, acc: Optional[AccuracyTarget] = None) -> ZetaValue:
    """sum' (a n1^2 + b n1 n2 + c n2^2 + q)^{-s}, origin excluded, for q > 0.

    The only pole is s = 1, residue 2 pi / sqrt(4ac - b^2) independent of q.
    """
    a, b, c, delta = _check_binary(a, b, c)
    q = as_real(q, "q")
    s = as_complex(s)
    acc = resolve_accuracy(acc)
    if q <= 0:
        raise DomainError(f"q must be positive, got {q}; use chowla_selberg_2d")
    residue = 2 * math.pi / math.sqrt(delta)
    if s == 1:
        raise PoleError(1.0, residue, "two-dimensional Epstein zeta")

    # 2 pi q^{1-s} / ((s - 1) sqrt(Delta)), split into pole and regular part
    eps = s - 1
    regular_pole = residue * (np.expm1(-eps * math.log(q)) / eps if eps != 0 else -math.log(q))
    head = -q ** (-s) + residue / eps + regular_pole

    inv_gamma = rgamma(s)
    if inv_gamma == 0:
        value = head
        return ZetaValue(value, 10 * MACHINE_EPS * abs(value), nearest_pole=pole_info(s, 1, residue))

    cut_half = _bessel_cut(s - 0.5, acc)
    cut_one = _bessel_cut(s - 1, acc)
    sqrt_qa = math.sqrt(q / a)

    def count(step, cut):
        N = max(1, int(math.ceil(cut / step)))
        if N > acc.max_terms:
            raise ConvergenceError(f"{N} Bessel terms exceed max_terms")
        return N

    N1 = count(2 * math.pi * sqrt_qa, cut_half)
    n = np.arange(1, N1 + 1, dtype=float)
    K, K_err = _bessel_terms(s - 0.5, 2 * math.pi * n * sqrt_qa, acc)
    w = (q / a) ** 0.25 * (math.pi / math.sqrt(q * a)) ** s * np.power(n, s - 0.5)
    first, err = complex(np.sum(w * K)), float(np.sum(np.abs(w) * K_err))

    arg2 = 4 * math.pi * math.sqrt(a * q / delta)
    N2 = count(arg2, cut_one)
    n = np.arange(1, N2 + 1, dtype=float)
    K, K_err = _bessel_terms(s - 1, arg2 * n, acc)
    w = sqrt_qa * (2 * math.pi * math.sqrt(a / (q * delta))) ** s * np.power(n, s - 1)
    second = complex(np.sum(w * K))
    err += float(np.sum(np.abs(w) * K_err))

    N3 = count(math.pi * math.sqrt(delta) / a, cut_half)
    nn, dd = [], []
    for d in range(1, N3 + 1):
        k = np.arange(1, N3 // d + 1)
        nn.append(d * k)
        dd.append(np.full(k.shape, d))
    nn = np.concatenate(nn).astype(float)
    dd = np.concatenate(dd).astype(float)
    shifted = delta + 4 * a * q / dd ** 2
    K, K_err = _bessel_terms(s - 0.5, math.pi * nn / a * np.sqrt(shifted), acc)
    w = (
        math.sqrt(2 / a)
        * (2 * math.pi) ** s
        * np.power(nn, s - 0.5)
        * np.cos(math.pi * nn * b / a)
        * np.power(dd, 1 - 2 * s)
        * np.power(shifted, 0.25 - s / 2)
    )
    third = complex(np.sum(w * K))
    err += float(np.sum(np.abs(w) * K_err))

    series = 4 * inv_gamma * (first + second + third)
    value = head + series
    return ZetaValue(
        value,
        4 * abs(inv_gamma) * err + 10 * MACHINE_EPS * (abs(head) + abs(series) + abs(value)),
        nearest_pole=pole_info(s, 1, residue),
        terms_used=N1 + N2 + len(nn),
    )


def epstein_reflection(
    form: QuadraticFormSpec, s, acc: Optional[AccuracyTarget] = None
) -> Tuple[ZetaValue, ZetaValue]:
    """Both sides of Gamma(s) Z(s; A) = pi^{2s-p/2} / sqrt(det A) Gamma(p/2-s) Z(p/2-s; A^{-1})
    with Z(s; A) = sum' (n^T A n)^{-s}, each evaluated independently."""
    s = as_complex(s)
    acc = resolve_accuracy(acc)
    A = form.matrix
    p = form.p
    left = _massless(A, s, acc)
    right = _massless(form.inverse, p / 2 - s, acc)
    lfac = gamma(s)
    rfac = math.pi ** (2 * s - p / 2) / math.sqrt(form.det) * gamma(p / 2 - s)
    return (
        ZetaValue(lfac * left.value, abs(lfac) * left.err_estimate),
        ZetaValue(rfac * right.value, abs(rfac) * right.err_estimate),
    )


_THETA_EXPONENT = 40.0


def jacobi_theta_check(z, t) -> Tuple[ZetaValue, ZetaValue]:
    """sum_n e^{-(n+z)^2 t} and its dual
    sqrt(pi/t) [1 + 2 sum_{n>=1} e^{-pi^2 n^2 / t} cos(2 pi n z)]."""
    z = as_complex(z)
    t = as_complex(t)
    if t.real <= 0:
        raise DomainError(f"Re t must be positive, got {t}")
    x, y = z.real, abs(z.imag)
    U = (y * abs(t.imag) + math.sqrt((y * t.imag) ** 2 + t.real * (_THETA_EXPONENT + y * y * t.real))) / t.real
    n = np.arange(math.floor(-x - U) - 1, math.ceil(-x + U) + 2)
    left_terms = np.exp(-((n + z) ** 2) * t)
    left = complex(np.sum(left_terms))

    r = (1 / t).real
    N = int(math.ceil((2 * math.pi * y + math.sqrt(4 * math.pi ** 2 * y * y + 4 * math.pi ** 2 * r * _THETA_EXPONENT)) / (2 * math.pi ** 2 * r))) + 1
    k = np.arange(1, N + 1)
    right_terms = np.exp(-(math.pi ** 2) * k ** 2 / t) * np.cos(2 * math.pi * k * z)
    right = complex(np.sqrt(math.pi / t) * (1 + 2 * np.sum(right_terms)))
    return (
        ZetaValue(left, 10 * MACHINE_EPS * float(np.sum(np.abs(left_terms)))),
        ZetaValue(right, 10 * MACHINE_EPS * abs(np.sqrt(math.pi / t)) * (1 + 2 * float(np.sum(np.abs(right_terms))))),
    )
