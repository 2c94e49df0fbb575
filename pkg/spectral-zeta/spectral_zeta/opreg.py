"""Operator-regularization identities on finite positive-definite matrices.

In finite dimension every identity holds exactly: the n-th epsilon
derivative of (1 + alpha_1 eps + ... + alpha_n eps^n) eps^n / n! H^{-eps-m}
at eps = 0 is H^{-m} for any alphas, and H^{-eps-m} has no poles in eps.
The derivatives are taken by central stencils on the eigenvalues with
Richardson extrapolation over three step sizes.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import math

import numpy as np

from .analytic import nth_derivative_at_zero, richardson
from .common import ConvergenceError, DomainError, StencilInstabilityError

MAX_SIZE = 64
RECONSTRUCTION_TOL = 1e-12
INSTABILITY_TOL = 1e-6
EPS_RANGE = (1e-4, 1e-1)


@dataclass(frozen=True, eq=False)
class MatrixFunctionCache:
    """Eigendecomposition H = V diag(lambda) V^H of a Hermitian
    positive-definite matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrix(cls, H) -> "MatrixFunctionCache":
        H = np.atleast_2d(np.asarray(H))
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DomainError(f"operator must be a square matrix, got shape {H.shape}")
        if H.shape[0] > MAX_SIZE:
            raise DomainError(f"operator size must not exceed {MAX_SIZE}, got {H.shape[0]}")
        if not np.allclose(H, H.conj().T, rtol=0, atol=1e-14 * np.abs(H).max()):
            raise DomainError("operator must be Hermitian")
        lam, V = np.linalg.eigh(H)
        if lam[0] <= 0:
            raise DomainError(f"operator must be positive definite, smallest eigenvalue {lam[0]:.3g}")
        cache = cls(lam, V)
        residual = np.linalg.norm(cache.apply(lam) - H)
        if residual > RECONSTRUCTION_TOL * max(np.linalg.norm(H), 1.0) * H.shape[0]:
            raise ConvergenceError(f"eigendecomposition residual {residual:.3g} is too large")
        return cache

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]

    def apply(self, values) -> np.ndarray:
        """V diag(values) V^H."""
        V = self.eigenvectors
        out = (V * np.asarray(values)) @ V.conj().T
        return out.real if np.isrealobj(V) and np.isrealobj(values) else out

    def power(self, x: float) -> np.ndarray:
        return self.apply(self.eigenvalues ** x)

    def log(self) -> np.ndarray:
        return self.apply(np.log(self.eigenvalues))


@dataclass(frozen=True, eq=False)
class ORProblem:
    """H^{-m} at loop order n with the arbitrary constants alpha_1..alpha_n."""

    H: np.ndarray
    m: int
    n: int
    alphas: Optional[Sequence[float]] = None
    cache: MatrixFunctionCache = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"exponent m must be a positive integer, got {self.m}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"loop order n must be a positive integer, got {self.n}")
        alphas = np.zeros(int(self.n)) if self.alphas is None else np.asarray(self.alphas, dtype=float)
        if alphas.shape != (self.n,):
            raise DomainError(f"need {self.n} constants alpha, got {alphas.shape}")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "cache", MatrixFunctionCache.from_matrix(self.H))


@dataclass(frozen=True)
class ORResult:
    """Extrapolated matrix, its error estimate, the plain stencil value at
    the finest step and the coarsest step used."""

    value: np.ndarray
    err_estimate: float
    raw: np.ndarray
    eps_step: float


def _check_step(eps_step: float):
    low, high = EPS_RANGE
    if not low <= eps_step <= high:
        raise DomainError(f"eps_step must lie in [{low:g}, {high:g}], got {eps_step}")


def _polynomial(alphas: np.ndarray, eps: float) -> float:
    return 1.0 + sum(a * eps ** (i + 1) for i, a in enumerate(alphas))


def _extrapolated_derivative(
    cache: MatrixFunctionCache,
    scalar: Callable[[float], np.ndarray],
    order: int,
    eps_step: float,
    reference: np.ndarray,
) -> ORResult:
    """order-th eps-derivative at 0 of a function of the eigenvalues."""
    _check_step(eps_step)
    steps = [eps_step, eps_step / 2, eps_step / 4]
    estimates = [nth_derivative_at_zero(scalar, order, h) for h in steps]
    values, err = richardson(estimates, 2.0, 2.0, 2.0)
    scale = max(float(np.max(np.abs(reference))), np.finfo(float).tiny)
    if err > INSTABILITY_TOL * scale:
        raise StencilInstabilityError(
            f"extrapolation spread {err:.3g} exceeds {INSTABILITY_TOL:g} of the target scale {scale:.3g}"
        )
    return ORResult(cache.apply(values.real), err, cache.apply(estimates[-1].real), eps_step)


def or_multi_power(
    H, ms: Sequence[int], n: int, alphas: Optional[Sequence[float]] = None, eps_step: float = 0.02
) -> ORResult:
    """H^{-(m_1 + ... + m_r)} as the n-th eps derivative of
    1 + (1 + sum alpha_i eps^i) eps^n / n! H^{-eps-m_1} ... H^{-eps-m_r}."""
    ms = [int(m) for m in ms]
    if not ms or min(ms) < 1:
        raise DomainError(f"exponents must be positive integers, got {ms}")
    prob = ORProblem(H, ms[0], n, alphas)
    lam = prob.cache.eigenvalues
    total, r = sum(ms), len(ms)

    def scalar(eps):
        return 1.0 + _polynomial(prob.alphas, eps) * eps ** n / math.factorial(n) * lam ** (-r * eps - total)

    return _extrapolated_derivative(prob.cache, scalar, n, eps_step, lam ** (-total))


def or_regularized_power(prob: ORProblem, eps_step: float = 0.02) -> ORResult:
    """H^{-m} = d^n/d eps^n [1 + (1 + alpha_1 eps + ... + alpha_n eps^n) eps^n / n! H^{-eps-m}] at 0."""
    return or_multi_power(prob.H, [prob.m], prob.n, prob.alphas, eps_step)


def schwinger_log(H, n: int, eps_step: float = 0.02) -> ORResult:
    """ln H = -d^n/d eps^n [eps^{n-1} / n! H^{-eps}] at 0."""
    if int(n) != n or n < 1:
        raise DomainError(f"loop order n must be a positive integer, got {n}")
    cache = MatrixFunctionCache.from_matrix(H)
    lam = cache.eigenvalues

    def scalar(eps):
        return -(eps ** (n - 1)) / math.factorial(n) * lam ** (-eps)

    return _extrapolated_derivative(cache, scalar, n, eps_step, np.maximum(np.abs(np.log(lam)), 1.0))


def feynman_schwinger_bridge(H, m: int, eps_step: float = 0.02) -> Tuple[np.ndarray, ORResult]:
    """H^{-m} next to (-1)^{m-1} / (m-1)! d^m/dH^m ln H, the derivative taken
    eigenvalue by eigenvalue with a relative step."""
    if int(m) != m or m < 1:
        raise DomainError(f"exponent m must be a positive integer, got {m}")
    cache = MatrixFunctionCache.from_matrix(H)
    lam = cache.eigenvalues
    sign = (-1) ** (m - 1) / math.factorial(m - 1)

    def scalar(delta):
        # x = lam (1 + delta), so d^m/d delta^m = lam^m d^m/dx^m
        return sign * np.log(lam * (1 + delta)) / lam ** m

    return cache.power(-m), _extrapolated_derivative(cache, scalar, m, eps_step, lam ** (-m))


def or_laurent_coefficients(
    H, m: int, kmin: int, kmax: int, radius: float = 0.5, nodes: int = 64
) -> np.ndarray:
    """Laurent coefficients c_kmin..c_kmax in eps of H^{-eps-m}, from the
    discrete Fourier transform on the circle |eps| = radius.

    Returns an array of shape (kmax - kmin + 1, N, N).
    """
    if kmax < kmin:
        raise DomainError(f"empty coefficient range {kmin}..{kmax}")
    if nodes < 2 * max(abs(kmin), abs(kmax)) + 2:
        raise DomainError(f"{nodes} nodes cannot resolve coefficients up to |k| = {max(abs(kmin), abs(kmax))}")
    cache = MatrixFunctionCache.from_matrix(H)
    lam = cache.eigenvalues
    eps = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    samples = lam[None, :] ** (-eps[:, None] - m)
    spectrum = np.fft.fft(samples, axis=0) / nodes
    out = []
    for k in range(kmin, kmax + 1):
        out.append(cache.apply(spectrum[k % nodes] / radius ** k))
    return np.array(out)


def finite_part_expression(prob: ORProblem, radius: float = 0.5, nodes: int = 64) -> np.ndarray:
    """c_0 + sum_i alpha_i c_{-i}: the n-th derivative of the regulated
    expression written through the Laurent coefficients of H^{-eps-m}.
    The pole coefficients c_{-i} are where the alphas would enter."""
    coeffs = or_laurent_coefficients(prob.H, prob.m, -prob.n, 0, radius, nodes)
    total = coeffs[-1].copy()
    for i, alpha in enumerate(prob.alphas, start=1):
        total = total + alpha * coeffs[-1 - i]
    return total
