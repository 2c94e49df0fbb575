from dataclasses import dataclass, replace
from typing import Optional

import functools
import os
import sys

import numpy as np

MACHINE_EPS = float(np.finfo(float).eps)


class bcolors:
    OKBLUE = "\033[94m"
    OKGREEN = "\033[92m"
    FAIL = "\033[91m"
    ENDC = "\033[0m"


def abort(msg: str, status: int = 1):
    print(bcolors.FAIL + msg + bcolors.ENDC, file=sys.stderr)
    sys.exit(status)


def success(msg: str):
    print(bcolors.OKBLUE + msg + bcolors.ENDC, file=sys.stderr)


class ZetaError(Exception):
    """Base class of every error raised by the evaluators.

    ``exit_status`` is the process status the command line front end uses
    when the error escapes a job.
    """

    exit_status = 2


class PoleError(ZetaError):
    """The requested point is exactly a pole of the function."""

    def __init__(self, location: complex, residue: complex, what: str = "function"):
        self.location = complex(location)
        self.residue = complex(residue)
        super().__init__(
            f"{what} has a pole at s = {_fmt(self.location)} "
            f"(residue {_fmt(self.residue)})"
        )


class DomainError(ZetaError, ValueError):
    pass


class SingularTermError(DomainError):
    pass


class InsufficientHeatDepthError(DomainError):
    pass


class ConvergenceError(ZetaError):
    exit_status = 3


class StencilInstabilityError(ConvergenceError):
    pass


class SchemaError(ZetaError, ValueError):
    exit_status = 1


class AccuracyFloorWarning(UserWarning):
    """An asymptotic series could not reach the requested tolerance."""


class ExperimentalWarning(UserWarning):
    """An input outside the guaranteed convergence regime was accepted."""


def _fmt(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}i"


@functools.lru_cache(maxsize=None)
def get_environment_defaults():
    """Load accuracy defaults from the environment

    Supported variables:
        SPECTRAL_ZETA_RTOL
        SPECTRAL_ZETA_ABS_FLOOR
        SPECTRAL_ZETA_MAX_TERMS
    """
    environment = {}
    for varname, key, convert in (
        ("SPECTRAL_ZETA_RTOL", "rel_tol", float),
        ("SPECTRAL_ZETA_ABS_FLOOR", "abs_floor", float),
        ("SPECTRAL_ZETA_MAX_TERMS", "max_terms", int),
    ):
        value = os.environ.get(varname, "").strip()
        if value:
            try:
                environment[key] = convert(value)
            except ValueError:
                raise DomainError(f"{varname}={value!r} is not a valid {key}")
    return environment


@dataclass(frozen=True)
class AccuracyTarget:
    """Tolerances shared by every evaluator.

    Parameters
    ----------
    rel_tol
        relative accuracy requested from series and quadratures
    abs_floor
        magnitude below which an individual term is treated as zero
    max_terms
        hard cap on the number of series terms (lattice vectors, Bessel
        terms, asymptotic terms) an evaluation may use
    """

    rel_tol: float = 1e-12
    abs_floor: float = 1e-17
    max_terms: int = 200_000

    def __post_init__(self):
        if not 10 * MACHINE_EPS <= self.rel_tol < 1:
            raise DomainError(
                f"rel_tol must lie in [{10 * MACHINE_EPS:.3g}, 1), got {self.rel_tol}"
            )
        if self.abs_floor < 0:
            raise DomainError(f"abs_floor must be non-negative, got {self.abs_floor}")
        if self.max_terms < 8:
            raise DomainError(f"max_terms must be at least 8, got {self.max_terms}")

    @classmethod
    def from_env(cls, **overrides) -> "AccuracyTarget":
        settings = dict(get_environment_defaults())
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**settings)

    def with_rel_tol(self, rel_tol: float) -> "AccuracyTarget":
        return replace(self, rel_tol=rel_tol)

    @property
    def floor(self) -> float:
        """Smallest magnitude that still matters when accumulating."""
        return max(self.abs_floor, np.finfo(float).tiny)


DEFAULT_ACCURACY = AccuracyTarget()


def resolve_accuracy(acc: Optional[AccuracyTarget]) -> AccuracyTarget:
    return DEFAULT_ACCURACY if acc is None else acc


@dataclass(frozen=True)
class PoleInfo:
    # poles of every function in the package lie on the real axis
    location: float
    residue: complex
    distance: float


@dataclass(frozen=True)
class ZetaValue:
    """A complex value together with its error estimate.

    ``nearest_pole`` is set whenever the evaluation point lies within 0.01 of
    a pole of the evaluated function.
    """

    value: complex
    err_estimate: float = 0.0
    nearest_pole: Optional[PoleInfo] = None
    terms_used: int = 0
    shells_used: int = 0
    accuracy_floor_reached: bool = False
    underflow: bool = False

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        err = float(self.err_estimate)
        if not np.isfinite(err):
            raise ConvergenceError("error estimate is not finite")
        object.__setattr__(self, "err_estimate", abs(err))
        object.__setattr__(self, "accuracy_floor_reached", bool(self.accuracy_floor_reached))
        object.__setattr__(self, "underflow", bool(self.underflow))

    def __complex__(self) -> complex:
        return self.value

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag

    def with_pole(self, pole: Optional[PoleInfo]) -> "ZetaValue":
        return replace(self, nearest_pole=pole)


POLE_REPORT_DISTANCE = 0.01


def pole_info(s: complex, location: complex, residue: complex) -> Optional[PoleInfo]:
    distance = abs(complex(s) - complex(location))
    if distance < POLE_REPORT_DISTANCE:
        return PoleInfo(complex(location).real, complex(residue), distance)
    return None


def as_complex(s) -> complex:
    """Accept numbers and strings such as ``"3+0.5i"``."""
    if isinstance(s, str):
        text = s.strip().replace(" ", "").replace("i", "j")
        try:
            return complex(text)
        except ValueError:
            raise DomainError(f"cannot parse complex number {s!r}")
    value = complex(s)
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise DomainError(f"complex argument must be finite, got {s!r}")
    return value


def as_real(x, name: str) -> float:
    value = complex(x)
    if value.imag != 0:
        raise DomainError(f"{name} must be real, got {x!r}")
    if not np.isfinite(value.real):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return value.real

