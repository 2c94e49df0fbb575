"""Quadratic forms, half-lattice enumeration and the direct summation oracle."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import functools
import math
import warnings

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from .common import (
    AccuracyTarget,
    ConvergenceError,
    DomainError,
    ExperimentalWarning,
    SingularTermError,
    ZetaValue,
    as_complex,
    resolve_accuracy,
)

MAX_DIMENSION = 8


@dataclass(frozen=True, eq=False)
class QuadraticFormSpec:
    """Positive-definite form Q(x) = 1/2 x^T A x.

    The matrix is stored as given; it must be exactly symmetric.
    """

    matrix: np.ndarray

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        if A.ndim == 0:
            A = A.reshape(1, 1)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DomainError(f"form matrix must be square, got shape {A.shape}")
        if not 1 <= A.shape[0] <= MAX_DIMENSION:
            raise DomainError(
                f"dimension must lie in 1..{MAX_DIMENSION}, got {A.shape[0]}"
            )
        if not np.all(np.isfinite(A)):
            raise DomainError("form matrix has non-finite entries")
        if not np.array_equal(A, A.T):
            raise DomainError("form matrix must be exactly symmetric")
        try:
            np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            raise DomainError("form matrix is not positive definite")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    @classmethod
    def from_coefficients(cls, a: float, b: float, c: float) -> "QuadraticFormSpec":
        """The form a n1^2 + b n1 n2 + c n2^2, i.e. A = [[2a, b], [b, 2c]]."""
        return cls(np.array([[2.0 * a, b], [b, 2.0 * c]]))

    @classmethod
    def from_metric(cls, g) -> "QuadraticFormSpec":
        """The form n^T g n of a torus metric, i.e. A = 2g."""
        return cls(2.0 * np.atleast_2d(np.array(g, dtype=float)))

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    @functools.cached_property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    @functools.cached_property
    def inverse(self) -> np.ndarray:
        inv = np.linalg.inv(self.matrix)
        return 0.5 * (inv + inv.T)

    @functools.cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def value(self, n) -> np.ndarray:
        """Q evaluated row-wise on an array of vectors."""
        n = np.atleast_2d(np.asarray(n, dtype=float))
        return 0.5 * np.einsum("ij,jk,ik->i", n, self.matrix, n)

    def dual_value(self, m) -> np.ndarray:
        """m^T A^{-1} m row-wise."""
        m = np.atleast_2d(np.asarray(m, dtype=float))
        return np.einsum("ij,jk,ik->i", m, self.inverse, m)


@dataclass(frozen=True, eq=False)
class EpsteinParams:
    """Arguments of zeta_{A,c,q}(s) = sum_n [Q(n + c) + q]^{-s}.

    Complex ``q`` is accepted only with ``experimental=True``.
    """

    form: QuadraticFormSpec
    c: Optional[np.ndarray] = None
    q: complex = 0.0
    experimental: bool = field(default=False)

    def __post_init__(self):
        if self.c is None:
            c = np.zeros(self.form.p)
        else:
            c = np.atleast_1d(np.array(self.c, dtype=float))
        if c.shape != (self.form.p,):
            raise DomainError(
                f"offset must have {self.form.p} components, got shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        q = as_complex(self.q)
        if q.imag != 0 or q.real < 0:
            if not self.experimental:
                raise DomainError(
                    f"q must be real and non-negative, got {q}; "
                    "pass experimental=True to accept it without convergence guarantee"
                )
            warnings.warn(
                f"q = {q} is outside [0, inf); exponential convergence is not guaranteed",
                ExperimentalWarning,
            )
        object.__setattr__(self, "q", q.real if q.imag == 0 else q)

    @property
    def p(self) -> int:
        return self.form.p

    @property
    def origin_base(self) -> complex:
        """Q(c) + q, the base of the n = 0 term."""
        return complex(self.form.value(self.c)[0] + self.q)


def _box_shell(p: int, r: int) -> np.ndarray:
    if r == 0:
        return np.zeros((1, p), dtype=np.int64)
    full = np.arange(-r, r + 1)
    inner = np.arange(-r + 1, r)
    edge = np.array([-r, r])
    pieces = []
    for i in range(p):
        axes = [inner] * i + [edge] + [full] * (p - 1 - i)
        grid = np.meshgrid(*axes, indexing="ij")
        pieces.append(np.stack(grid, axis=-1).reshape(-1, p))
    return np.concatenate(pieces).astype(np.int64)


def full_shell(p: int, r: int) -> np.ndarray:
    """All vectors of Z^p with max-norm exactly r."""
    if p < 1:
        raise DomainError(f"dimension must be positive, got {p}")
    if r < 0:
        raise DomainError(f"shell index must be non-negative, got {r}")
    return _box_shell(p, r)


def enumerate_half_lattice(p: int, shell_index: int) -> np.ndarray:
    """Vectors of max-norm ``shell_index`` whose first non-zero component is
    positive, one representative per +- pair.

    >>> enumerate_half_lattice(2, 1).tolist()
    [[1, -1], [1, 0], [1, 1], [0, 1]]
    """
    if shell_index == 0:
        return np.zeros((0, p), dtype=np.int64)
    shell = full_shell(p, shell_index)
    first = np.argmax(shell != 0, axis=1)
    keep = shell[np.arange(len(shell)), first] > 0
    return shell[keep]


def minimal_radius(params: EpsteinParams) -> int:
    """Smallest radius for which :func:`tail_bound` is finite."""
    return math.floor(float(np.linalg.norm(params.c)) + math.sqrt(params.p)) + 1


def tail_bound(params: EpsteinParams, sigma: float, radius: int) -> float:
    """Integral-test bound on sum over max-norm > radius of |[Q(n+c)+q]^{-s}|.

    Each lattice point owns a unit cube; on it |x| <= |n| + sqrt(p)/2, and the
    terms are bounded by the radial majorant
    g(r) = (lambda_min/2 (r - |c|)^2 + q)^{-sigma}.
    """
    p = params.p
    half_diag = math.sqrt(p) / 2
    c_norm = float(np.linalg.norm(params.c))
    lower = radius - 2 * half_diag
    if lower <= c_norm:
        return math.inf
    lam = float(params.form.eigenvalues[0])
    q = float(np.real(params.q))
    sphere = 2 * math.pi ** (p / 2) / gamma(p / 2)

    def integrand(rho):
        return (rho + half_diag) ** (p - 1) * (0.5 * lam * (rho - c_norm) ** 2 + q) ** (-sigma)

    value, _ = quad(integrand, lower, np.inf, limit=200)
    return sphere * value


def _shell_terms(params: EpsteinParams, s: complex, r: int, excludes_origin: bool):
    if excludes_origin and r == 0:
        return 0j, 0
    vectors = full_shell(params.p, r)
    base = params.form.value(vectors + params.c) + params.q
    if np.any(base == 0):
        raise SingularTermError(
            "Q(n + c) + q vanishes for a retained lattice vector; "
            "exclude the origin or shift c"
        )
    return complex(np.sum(np.power(base.astype(complex), -s))), len(vectors)


def _default_radius(params: EpsteinParams, sigma: float, acc: AccuracyTarget) -> int:
    first = abs(params.origin_base) if params.origin_base != 0 else 1.0
    target = acc.rel_tol * first ** (-sigma)
    radius = 8
    while tail_bound(params, sigma, radius) > target:
        radius *= 2
        if (2 * radius + 1) ** params.p > acc.max_terms:
            break
    return radius


def direct_lattice_sum(
    params: EpsteinParams,
    s,
    excludes_origin: bool = True,
    radius: Optional[int] = None,
    acc: Optional[AccuracyTarget] = None,
    n_jobs: int = 1,
) -> ZetaValue:
    """Brute-force sum of [Q(n + c) + q]^{-s} over the box of max-norm
    ``radius``, in the half-plane of absolute convergence.

    The error estimate is the rigorous integral-test bound on the omitted
    tail. Summation stops early once three consecutive shells each
    contribute less than ``rel_tol`` of the accumulated value. Shells may be
    evaluated by a thread pool; the reduction is always in shell order.
    """
    s = as_complex(s)
    acc = resolve_accuracy(acc)
    if isinstance(params.q, complex) or params.q < 0:
        raise DomainError("the direct sum needs a real non-negative q")
    if s.real <= params.p / 2:
        raise ConvergenceError(
            f"the lattice sum diverges for Re s = {s.real} <= p/2 = {params.p / 2}"
        )
    adaptive = radius is None
    if adaptive:
        radius = _default_radius(params, s.real, acc)
    smallest = minimal_radius(params)
    if radius < smallest:
        raise DomainError(
            f"radius {radius} is too small to bound the omitted tail, use at least {smallest}"
        )

    def shell(r):
        return _shell_terms(params, s, r, excludes_origin)

    total = 0j
    terms = 0
    quiet = 0
    used = 0
    with ThreadPoolExecutor(max_workers=max(1, n_jobs)) as executor:
        for contribution, count in executor.map(shell, range(radius + 1)):
            total += contribution
            terms += count
            used += 1
            if used > smallest and abs(contribution) < acc.rel_tol * max(abs(total), acc.floor):
                quiet += 1
            else:
                quiet = 0
            if adaptive and quiet >= 3:
                break
    return ZetaValue(
        total,
        tail_bound(params, s.real, used - 1),
        terms_used=terms,
        shells_used=used - 1,
    )
