"""Spectral zeta functions continued through the Mellin transform of the
heat trace.

For a spectrum {lambda_k} with multiplicities d_k and heat trace
theta(t) = sum d_k e^{-t lambda_k} ~ sum_j c_j t^{alpha_j} as t -> 0,

    Gamma(s) zeta(s) = int_T^inf t^{s-1} theta(t) dt
                     + sum_j c_j T^{s+alpha_j} / (s + alpha_j)
                     + int_0^T t^{s-1} [theta(t) - sum_j c_j t^{alpha_j}] dt

with split point T (1 by default). The last integral is computed on
[small_t, T]; below small_t the supplied expansion is taken as exact up to
its first omitted order.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import math

import numpy as np
from scipy.integrate import quad_vec
from scipy.signal import fftconvolve
from scipy.special import gamma, psi, rgamma

from .common import (
    MACHINE_EPS,
    AccuracyTarget,
    ConvergenceError,
    DomainError,
    InsufficientHeatDepthError,
    PoleError,
    ZetaValue,
    as_complex,
    as_real,
    pole_info,
    resolve_accuracy,
)
from .lattice import QuadraticFormSpec, enumerate_half_lattice
from .specfun import EULER_GAMMA

# terms with t (lambda - lambda_0) beyond this are dropped from theta(t)
THETA_EXPONENT = 45.0
DEFAULT_HEAT_DEPTH = 12


@dataclass(frozen=True)
class HeatTerm:
    alpha: float
    coeff: float


def _merge_heat(terms: Iterable[Tuple[float, float]]) -> Tuple[HeatTerm, ...]:
    merged: Dict[float, float] = {}
    for alpha, coeff in terms:
        key = round(float(alpha), 12)
        merged[key] = merged.get(key, 0.0) + float(coeff)
    return tuple(HeatTerm(a, c) for a, c in sorted(merged.items()) if c != 0)


Levels = Callable[[float], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True, eq=False)
class SpectrumModel:
    """Eigenvalues with multiplicities plus the small-t heat expansion.

    Parameters
    ----------
    levels
        ``levels(cutoff)`` returns the sorted eigenvalues not above
        ``cutoff`` and their multiplicities
    heat
        heat-trace coefficients with strictly increasing exponents
    lowest
        the smallest eigenvalue, positive
    small_t
        lower end of the numerically integrated part of the small-t range
    finite
        the spectrum is complete as returned by ``levels(inf)``; zeta is then
        a finite sum
    """

    levels: Levels
    heat: Tuple[HeatTerm, ...]
    lowest: float
    small_t: float = 1e-2
    finite: bool = False
    label: str = "spectrum"

    def __post_init__(self):
        if not self.lowest > 0:
            raise DomainError(f"the smallest eigenvalue must be positive, got {self.lowest}")
        alphas = [h.alpha for h in self.heat]
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise DomainError("heat exponents must be strictly increasing")
        if not 0 < self.small_t < 1:
            raise DomainError(f"small_t must lie in (0, 1), got {self.small_t}")
        object.__setattr__(self, "heat", tuple(self.heat))

    @classmethod
    def finite_spectrum(cls, eigenvalues, multiplicities=None, label="finite") -> "SpectrumModel":
        lam = np.asarray(eigenvalues, dtype=float)
        mult = np.ones_like(lam) if multiplicities is None else np.asarray(multiplicities, dtype=float)
        if lam.shape != mult.shape or lam.ndim != 1 or lam.size == 0:
            raise DomainError("eigenvalues and multiplicities must be matching non-empty lists")
        if np.any(mult <= 0):
            raise DomainError("multiplicities must be positive")
        order = np.argsort(lam)
        lam, mult = lam[order], mult[order]

        def levels(cutoff):
            keep = lam <= cutoff
            return lam[keep], mult[keep]

        return cls(levels, (), float(lam[0]), finite=True, label=label)

    @classmethod
    def from_levels(
        cls, eigenvalues, multiplicities, heat: Sequence[Tuple[float, float]], small_t: float = 1e-2, label="levels"
    ) -> "SpectrumModel":
        """An explicit list that is complete up to its largest entry, with
        caller-supplied heat coefficients. An empty heat list means the
        spectrum is finite."""
        if not heat:
            return cls.finite_spectrum(eigenvalues, multiplicities, label)
        lam = np.asarray(eigenvalues, dtype=float)
        mult = np.asarray(multiplicities, dtype=float)
        order = np.argsort(lam)
        lam, mult = lam[order], mult[order]
        top = lam[-1]

        def levels(cutoff):
            if cutoff > top:
                raise ConvergenceError(
                    f"{label}: eigenvalues are listed up to {top:.6g}, "
                    f"the heat integrals need them up to {cutoff:.6g}"
                )
            keep = lam <= cutoff
            return lam[keep], mult[keep]

        return cls(levels, _merge_heat(heat), float(lam[0]), small_t=small_t, label=label)

    @property
    def cutoff(self) -> float:
        return self.lowest + THETA_EXPONENT / self.small_t

    @property
    def max_alpha(self) -> float:
        return self.heat[-1].alpha if self.heat else -math.inf


def circle_spectrum(
    a: float, q: float, half_line: bool = False, zero_mode: bool = True, depth: int = DEFAULT_HEAT_DEPTH
) -> SpectrumModel:
    """a n^2 + q over n in Z, or over n >= 0 with ``half_line``; without
    ``zero_mode`` the n = 0 level is dropped."""
    a, q = as_real(a, "a"), as_real(q, "q")
    if a <= 0 or q < 0:
        raise DomainError(f"need a > 0 and q >= 0, got a={a}, q={q}")
    if q == 0 and zero_mode:
        raise DomainError("q = 0 has a zero eigenvalue; drop the zero mode")
    main = 0.5 if half_line else 1.0
    zero = {(True, True): 0.5, (True, False): -0.5, (False, True): 0.0, (False, False): -1.0}[
        (half_line, zero_mode)
    ]
    heat = []
    for j in range(depth + 1):
        weight = (-q) ** j / math.factorial(j)
        heat.append((j - 0.5, main * math.sqrt(math.pi / a) * weight))
        heat.append((j, zero * weight))
    first = 0 if zero_mode else 1

    def levels(cutoff):
        top = int(math.floor(math.sqrt(max(cutoff - q, 0) / a)))
        n = np.arange(first, top + 1, dtype=float)
        mult = np.ones_like(n) if half_line else np.where(n == 0, 1.0, 2.0)
        return a * n ** 2 + q, mult

    return SpectrumModel(
        levels,
        _merge_heat(heat),
        a * first + q,
        small_t=min(0.1, math.pi ** 2 / (40 * a)),
        label=f"circle(a={a:g}, q={q:g})",
    )


def torus_spectrum(
    form: QuadraticFormSpec,
    q: float,
    zero_mode: bool = True,
    depth: int = DEFAULT_HEAT_DEPTH,
    max_terms: int = 1_000_000,
) -> SpectrumModel:
    """1/2 n^T A n + q over n in Z^p.

    Levels are collected shell by shell over half the lattice, each vector
    standing for the pair +-n, and equal values are merged. ``max_terms``
    caps the number of retained levels below the cutoff.
    """
    q = as_real(q, "q")
    if q < 0 or (q == 0 and zero_mode):
        raise DomainError(f"need q > 0 (or q = 0 without zero mode), got {q}")
    volume = (2 * math.pi) ** (form.p / 2) / math.sqrt(form.det)
    heat = []
    for j in range(depth + 1):
        weight = (-q) ** j / math.factorial(j)
        heat.append((j - form.p / 2, volume * weight))
        if not zero_mode:
            heat.append((j, -weight))
    lam_min = float(form.eigenvalues[0])

    def levels(cutoff):
        # |n|_inf = r forces Q(n) >= lam_min r^2 / 2
        radius = int(math.ceil(math.sqrt(2 * max(cutoff - q, 0) / lam_min)))
        values = [np.array([q])] if zero_mode else []
        weights = [np.ones(1)] if zero_mode else []
        retained = 0
        for r in range(1, radius + 1):
            lam = form.value(enumerate_half_lattice(form.p, r)) + q
            lam = lam[lam <= cutoff]
            retained += lam.size
            if retained > max_terms:
                raise ConvergenceError(
                    f"torus spectrum has more than max_terms = {max_terms} levels below {cutoff:.6g}"
                )
            values.append(lam)
            weights.append(np.full(lam.size, 2.0))
        if not values:
            return np.zeros(0), np.zeros(0)
        lam, inverse = np.unique(np.concatenate(values), return_inverse=True)
        return lam, np.bincount(inverse, weights=np.concatenate(weights))

    if zero_mode:
        lowest = q
    else:
        lowest = float(levels(q + 2 * float(form.eigenvalues[-1]))[0][0])
    return SpectrumModel(
        levels,
        _merge_heat(heat),
        lowest,
        small_t=min(0.1, math.pi ** 2 / (20 * float(form.eigenvalues[-1]))),
        label=f"torus(p={form.p}, q={q:g})",
    )


def sum_of_squares_counts(dim: int, top: int) -> np.ndarray:
    """r_dim(u), the number of n in Z^dim with |n|^2 = u, for u = 0..top.

    >>> sum_of_squares_counts(2, 5).tolist()
    [1, 4, 4, 0, 4, 8]
    """
    base = np.zeros(top + 1)
    k = np.arange(0, int(math.isqrt(top)) + 1)
    base[k ** 2] = 2.0
    base[0] = 1.0
    counts = np.array([1.0])
    for _ in range(dim):
        counts = fftconvolve(counts, base)[: top + 1]
    return np.rint(counts).astype(np.int64)


def isotropic_torus_spectrum(dim: int, q: float, depth: int = DEFAULT_HEAT_DEPTH) -> SpectrumModel:
    """|n|^2 + q over Z^dim, grouped by |n|^2 with sum-of-squares multiplicities."""
    q = as_real(q, "q")
    if q <= 0:
        raise DomainError(f"q must be positive, got {q}")
    if not 1 <= dim <= 8:
        raise DomainError(f"dimension must lie in 1..8, got {dim}")
    heat = [(j - dim / 2, math.pi ** (dim / 2) * (-q) ** j / math.factorial(j)) for j in range(depth + 1)]

    def levels(cutoff):
        top = int(math.floor(cutoff - q))
        counts = sum_of_squares_counts(dim, max(top, 0))
        u = np.nonzero(counts)[0]
        return u + q, counts[u].astype(float)

    return SpectrumModel(levels, _merge_heat(heat), q, small_t=0.1, label=f"torus{dim}(q={q:g})")


def product_spectrum(dim: int, q1: float, q2: float, depth: int = 6) -> SpectrumModel:
    """(|n|^2 + q1)(|n|^2 + q2) over Z^dim.

    With P = q1 q2 and S = q1 + q2 the heat coefficients are
    pi^{D/2} / Gamma(D/2) (-P)^i (-S)^j / (i! j!) Gamma((D/2 + j)/2) / 2
    at exponent i + j/2 - D/4.
    """
    q1, q2 = as_real(q1, "q1"), as_real(q2, "q2")
    if q1 <= 0 or q2 <= 0:
        raise DomainError(f"q1 and q2 must be positive, got {q1}, {q2}")
    P, S = q1 * q2, q1 + q2
    prefactor = math.pi ** (dim / 2) / gamma(dim / 2)
    heat = []
    for i in range(depth + 1):
        for j in range(2 * (depth - i) + 1):
            coeff = prefactor * (-P) ** i * (-S) ** j / (math.factorial(i) * math.factorial(j))
            heat.append((i + j / 2 - dim / 4, coeff * 0.5 * gamma((dim / 2 + j) / 2)))

    def levels(cutoff):
        # (u + q1)(u + q2) <= cutoff
        top = int(math.floor((-S + math.sqrt(S * S - 4 * (P - cutoff))) / 2))
        counts = sum_of_squares_counts(dim, max(top, 0))
        u = np.nonzero(counts)[0].astype(float)
        return (u + q1) * (u + q2), counts[u.astype(np.int64)].astype(float)

    return SpectrumModel(
        levels, _merge_heat(heat), P, small_t=1e-4, label=f"product{dim}(q1={q1:g}, q2={q2:g})"
    )


@dataclass(frozen=True)
class AnomalyInput:
    """Spectra of A, B and AB for commuting A and B with a common eigenbasis."""

    spec_A: SpectrumModel
    spec_B: SpectrumModel
    spec_AB: SpectrumModel


def commuting_pair(q1: float, q2: float, dim: int) -> AnomalyInput:
    """A = -Laplacian + q1 and B = -Laplacian + q2 on the unit-spectrum dim-torus."""
    return AnomalyInput(
        isotropic_torus_spectrum(dim, q1),
        isotropic_torus_spectrum(dim, q2),
        product_spectrum(dim, q1, q2),
    )


class _HeatTrace:
    def __init__(self, spec: SpectrumModel):
        self.lam, self.mult = spec.levels(spec.cutoff)
        self.lam = np.asarray(self.lam, dtype=float)
        self.mult = np.asarray(self.mult, dtype=float)
        self.base = float(self.lam[0])
        self.alphas = np.array([h.alpha for h in spec.heat])
        self.coeffs = np.array([h.coeff for h in spec.heat])

    def __call__(self, t: float) -> float:
        stop = np.searchsorted(self.lam, self.base + THETA_EXPONENT / t, side="right")
        return float(np.dot(self.mult[:stop], np.exp(-t * self.lam[:stop])))

    def remainder(self, t: float) -> float:
        return self(t) - float(np.dot(self.coeffs, t ** self.alphas))


def _upper_limit(lowest: float, split: float, sigma: float) -> float:
    T = split + 60 / lowest
    while lowest * (T - split) - max(sigma - 1, 0) * math.log(T / split) < 60:
        T *= 2
    return T


def _integrals(spec: SpectrumModel, s: complex, acc: AccuracyTarget, split: float, order: int):
    """The two heat integrals, differentiated ``order`` times in s."""
    theta = _HeatTrace(spec)
    top = _upper_limit(spec.lowest, split, s.real)

    def large(t):
        z = t ** (s - 1) * math.log(t) ** order * theta(t)
        return np.array([z.real, z.imag])

    def small(u):
        z = np.exp(u * s) * u ** order * theta.remainder(math.exp(u))
        return np.array([z.real, z.imag])

    opts = dict(epsrel=acc.rel_tol, epsabs=acc.floor, norm="max", limit=2000)
    big, big_err = quad_vec(large, split, top, **opts)
    if spec.small_t < split:
        near, near_err = quad_vec(small, math.log(spec.small_t), math.log(split), **opts)
    else:
        near, near_err = np.zeros(2), 0.0
    # below small_t: first omitted order of the expansion, bounded by the remainder there
    edge = abs(theta.remainder(spec.small_t))
    gap = s.real + spec.max_alpha
    cut = edge * spec.small_t ** s.real * abs(math.log(spec.small_t)) ** order / max(gap, 0.5)
    return complex(*big), complex(*near), float(big_err + near_err + cut)


def _pole_terms(spec: SpectrumModel, s: complex, split: float, order: int, skip: Optional[float] = None):
    total = 0j
    for h in spec.heat:
        if h.alpha == skip:
            continue
        w = s + h.alpha
        scale = split ** w
        if order == 0:
            total += h.coeff * scale / w
        else:
            total += h.coeff * scale * (math.log(split) / w - 1 / w ** 2)
    return total


def _check_depth(spec: SpectrumModel, s: complex):
    if spec.max_alpha <= -s.real:
        raise InsufficientHeatDepthError(
            f"{spec.label}: heat coefficients reach exponent {spec.max_alpha:g}, "
            f"need more than {-s.real:g} for Re s = {s.real:g}"
        )


def _exact_pole(spec: SpectrumModel, s: complex) -> Optional[HeatTerm]:
    for h in spec.heat:
        if s + h.alpha == 0:
            return h
    return None


def _nearest(spec: SpectrumModel, s: complex):
    best = None
    for h in spec.heat:
        residue = h.coeff * rgamma(-h.alpha)
        if residue == 0:
            continue
        info = pole_info(s, -h.alpha, residue)
        if info is not None and (best is None or info.distance < best.distance):
            best = info
    return best


def spectral_zeta_mellin(
    spec: SpectrumModel, s, acc: Optional[AccuracyTarget] = None, split: float = 1.0
) -> ZetaValue:
    """zeta(s) = sum d_k lambda_k^{-s} continued through the heat trace.

    Poles at s = -alpha_j with residue c_j / Gamma(-alpha_j); at a
    non-positive integer s = -n the value is (-1)^n n! c_j for the term with
    alpha_j = n (zero when there is none).
    """
    s = as_complex(s)
    acc = resolve_accuracy(acc)
    if spec.finite:
        lam, mult = spec.levels(math.inf)
        terms = mult * np.power(lam, -s)
        return ZetaValue(complex(np.sum(terms)), 10 * MACHINE_EPS * float(np.sum(np.abs(terms))), terms_used=len(lam))
    _check_depth(spec, s)
    exact = _exact_pole(spec, s)
    inverse = rgamma(s)
    if exact is not None:
        if inverse != 0:
            raise PoleError(s, exact.coeff * inverse, spec.label)
        n = int(round(-s.real))
        value = (-1) ** n * math.factorial(n) * exact.coeff
        return ZetaValue(value, 10 * MACHINE_EPS * abs(value))
    if inverse == 0:
        return ZetaValue(0.0)
    big, near, err = _integrals(spec, s, acc, split, 0)
    F = big + near + _pole_terms(spec, s, split, 0)
    value = inverse * F
    return ZetaValue(
        value,
        abs(inverse) * (err + 10 * MACHINE_EPS * abs(F)),
        nearest_pole=_nearest(spec, s),
    )


def spectral_zeta_derivative(
    spec: SpectrumModel, s, acc: Optional[AccuracyTarget] = None, split: float = 1.0
) -> ZetaValue:
    """zeta'(s) by differentiating the Mellin split under the integral sign."""
    s = as_complex(s)
    acc = resolve_accuracy(acc)
    if spec.finite:
        lam, mult = spec.levels(math.inf)
        terms = -mult * np.log(lam) * np.power(lam, -s)
        return ZetaValue(complex(np.sum(terms)), 10 * MACHINE_EPS * float(np.sum(np.abs(terms))), terms_used=len(lam))
    _check_depth(spec, s)
    inverse = rgamma(s)
    exact = _exact_pole(spec, s)
    if exact is not None and inverse != 0:
        raise PoleError(s, exact.coeff * inverse, spec.label)

    big, near, err = _integrals(spec, s, acc, split, 0)
    if inverse == 0:
        # 1/Gamma(s) = r1 (s + n) + r2 (s + n)^2 + ... at s = -n
        n = int(round(-s.real))
        r1 = (-1) ** n * math.factorial(n)
        harmonic = sum(1.0 / k for k in range(1, n + 1))
        r2 = r1 * (EULER_GAMMA - harmonic)
        c = exact.coeff if exact is not None else 0.0
        regular = big + near + _pole_terms(spec, s, split, 0, skip=None if exact is None else exact.alpha)
        regular += c * math.log(split)
        value = r1 * regular + r2 * c
        return ZetaValue(value, abs(r1) * err + 10 * MACHINE_EPS * abs(value))

    dbig, dnear, derr = _integrals(spec, s, acc, split, 1)
    F = big + near + _pole_terms(spec, s, split, 0)
    dF = dbig + dnear + _pole_terms(spec, s, split, 1)
    value = inverse * (dF - psi(s) * F)
    return ZetaValue(
        value,
        abs(inverse) * (derr + abs(psi(s)) * err) + 10 * MACHINE_EPS * abs(value),
        nearest_pole=_nearest(spec, s),
    )


def zeta_log_det(spec: SpectrumModel, acc: Optional[AccuracyTarget] = None) -> ZetaValue:
    """ln det_zeta = -zeta'(0)."""
    derivative = spectral_zeta_derivative(spec, 0.0, acc)
    return ZetaValue(-derivative.value.real, derivative.err_estimate)


def multiplicative_anomaly(pair: AnomalyInput, acc: Optional[AccuracyTarget] = None) -> ZetaValue:
    """ln det(AB) - ln det(A) - ln det(B)."""
    parts = [zeta_log_det(spec, acc) for spec in (pair.spec_AB, pair.spec_A, pair.spec_B)]
    value = parts[0].value.real - parts[1].value.real - parts[2].value.real
    return ZetaValue(value, sum(p.err_estimate for p in parts))


def anomaly_four_torus(q1: float, q2: float) -> float:
    """Closed form pi^2 (q1 - q2)^2 / 4 of the anomaly on the unit 4-torus."""
    return math.pi ** 2 * (q1 - q2) ** 2 / 4


def naive_dirichlet_sum(spec: SpectrumModel, s, cutoff: float) -> ZetaValue:
    """sum of d_k lambda_k^{-s} over lambda_k <= cutoff; an oracle in the
    region of absolute convergence."""
    s = as_complex(s)
    lam, mult = spec.levels(cutoff)
    terms = mult * np.power(lam, -s)
    return ZetaValue(complex(np.sum(terms[::-1])), 0.0, terms_used=len(lam))
