"""Invariant suite behind ``spectral-zeta selftest``.

Each check draws its inputs from a seeded generator, compares two
independent evaluations (or an evaluation and a closed form) and reports
the deviation next to the tolerance it has to meet.
"""
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import math
import warnings

import numpy as np
from scipy.special import gamma

from .analytic import extract_residue
from .common import AccuracyFloorWarning, AccuracyTarget, ZetaError, bcolors, resolve_accuracy
from .epstein import (
    chowla_selberg_2d,
    epstein_inhomogeneous,
    epstein_reflection,
    jacobi_theta_check,
)
from .lattice import EpsteinParams, QuadraticFormSpec, direct_lattice_sum
from .opreg import MatrixFunctionCache, ORProblem, or_regularized_power, schwinger_log
from .physics import TorusSpec, casimir_energy_torus, det_torus_2d, log_det_torus
from .spectral import AnomalyInput, SpectrumModel, multiplicative_anomaly
from .truncated import TruncatedParams, direct_truncated_sum, truncated_zeta

Check = Callable[[np.random.Generator, AccuracyTarget], Tuple[float, float]]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    detail: str = ""

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _binary_form(rng: np.random.Generator) -> Tuple[float, float, float]:
    a = rng.uniform(0.5, 2.0)
    c = rng.uniform(0.5, 2.0)
    b = rng.uniform(-1.0, 1.0) * math.sqrt(a * c)
    return a, b, c


def _relative(x: complex, y: complex) -> float:
    return abs(x - y) / max(abs(y), 1e-300)


def check_lattice_oracle(rng, acc):
    form = QuadraticFormSpec.from_coefficients(*_binary_form(rng))
    params = EpsteinParams(form, rng.uniform(0, 1, 2), rng.uniform(0.5, 2.0))
    s = rng.uniform(3.5, 4.5)
    series = epstein_inhomogeneous(params, s, acc)
    oracle = direct_lattice_sum(params, s, excludes_origin=False, acc=acc)
    return abs(series.value - oracle.value), 1e-10 * abs(oracle.value) + oracle.err_estimate + series.err_estimate


def check_leading_residue(rng, acc):
    form = QuadraticFormSpec.from_coefficients(*_binary_form(rng))
    params = EpsteinParams(form, q=rng.uniform(0.5, 2.0))
    expected = 2 * math.pi / (math.sqrt(form.det) * gamma(1.0))
    value, _ = extract_residue(lambda z: epstein_inhomogeneous(params, z, acc).value, 1.0)
    return _relative(value, expected), 1e-6


def check_chowla_selberg_residue(rng, acc):
    a, b, c = _binary_form(rng)
    expected = 2 * math.pi / math.sqrt(4 * a * c - b * b)
    value, _ = extract_residue(lambda z: chowla_selberg_2d(a, b, c, z, acc).value, 1.0)
    return _relative(value, expected), 1e-8


def check_reflection(rng, acc):
    form = QuadraticFormSpec.from_coefficients(*_binary_form(rng))
    s = complex(rng.uniform(0.2, 0.8), rng.uniform(0.5, 2.0))
    left, right = epstein_reflection(form, s, acc)
    return _relative(left.value, right.value), 1e-9


def check_jacobi_theta(rng, acc):
    left, right = jacobi_theta_check(rng.uniform(-1, 1), rng.uniform(0.2, 5.0))
    return _relative(left.value, right.value), 1e-12


def check_casimir_circle(rng, acc):
    energy = casimir_energy_torus(TorusSpec([[1.0]]), acc).energy
    return abs(energy.value + 1 / 6), 1e-12


def check_truncated_direct(rng, acc):
    params = TruncatedParams(1.0, rng.uniform(0.1, 0.9), rng.uniform(1.0, 3.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyFloorWarning)
        continued = truncated_zeta(params, 2.0, acc)
    direct = direct_truncated_sum(params, 2.0)
    return abs(continued.value - direct.value), 2 * (continued.err_estimate + direct.err_estimate) + 1e-12


def check_determinant_paths(rng, acc):
    a, b, c = _binary_form(rng)
    q = rng.uniform(0.5, 2.0)
    closed = det_torus_2d(a, b, c, q, acc)
    series = log_det_torus(
        EpsteinParams(QuadraticFormSpec.from_coefficients(a, b, c), q=q), acc, include_origin=False
    )
    return abs(closed.log_value - series.log_value), 1e-6


def check_finite_anomaly(rng, acc):
    lam_a = rng.uniform(0.5, 3.0, 5)
    lam_b = rng.uniform(0.5, 3.0, 5)
    pair = AnomalyInput(
        SpectrumModel.finite_spectrum(lam_a),
        SpectrumModel.finite_spectrum(lam_b),
        SpectrumModel.finite_spectrum(lam_a * lam_b),
    )
    return abs(multiplicative_anomaly(pair, acc).value), 1e-12


def _random_operator(rng: np.random.Generator, size: int) -> np.ndarray:
    M = rng.normal(size=(size, size))
    return M @ M.T / size + np.eye(size)


def check_or_power(rng, acc):
    H = _random_operator(rng, 4)
    problem = ORProblem(H, 2, 2, rng.normal(size=2))
    exact = problem.cache.power(-2)
    return float(np.max(np.abs(or_regularized_power(problem).value - exact))), 1e-6 * float(np.max(np.abs(exact)))


def check_schwinger_log(rng, acc):
    H = _random_operator(rng, 4)
    exact = MatrixFunctionCache.from_matrix(H).log()
    return float(np.max(np.abs(schwinger_log(H, 2).value - exact))), 1e-6 * max(1.0, float(np.max(np.abs(exact))))


CHECKS: Sequence[Tuple[str, Check]] = (
    ("lattice oracle (p = 2)", check_lattice_oracle),
    ("leading residue (p = 2)", check_leading_residue),
    ("Chowla-Selberg residue at s = 1", check_chowla_selberg_residue),
    ("reflection formula", check_reflection),
    ("Jacobi theta identity", check_jacobi_theta),
    ("Casimir energy of the unit circle", check_casimir_circle),
    ("truncated zeta vs direct sum", check_truncated_direct),
    ("determinant: closed form vs series", check_determinant_paths),
    ("anomaly of finite spectra", check_finite_anomaly),
    ("operator regularization H^-m", check_or_power),
    ("Schwinger log H", check_schwinger_log),
)


def run_selftest(seed: Optional[int] = 0, acc: Optional[AccuracyTarget] = None) -> List[CheckResult]:
    acc = resolve_accuracy(acc)
    rng = np.random.default_rng(seed)
    results = []
    for name, check in CHECKS:
        try:
            deviation, tolerance = check(rng, acc)
        except ZetaError as e:
            results.append(CheckResult(name, False, math.nan, math.nan, f"{type(e).__name__}: {e}"))
            continue
        results.append(CheckResult(name, bool(deviation <= tolerance), float(deviation), float(tolerance)))
    return results


def format_table(rows: Sequence[Dict[str, Any]], color: bool = False) -> str:
    """Pass/fail table of :func:`run_selftest` results given as dicts."""
    width = max(len(row["name"]) for row in rows)
    lines = [f"{'check'.ljust(width)}  {'deviation':>10}  {'tolerance':>10}  result"]
    for row in rows:
        status = "PASS" if row["passed"] else "FAIL"
        if color:
            status = (bcolors.OKGREEN if row["passed"] else bcolors.FAIL) + status + bcolors.ENDC
        line = f"{row['name'].ljust(width)}  {row['deviation']:>10.3g}  {row['tolerance']:>10.3g}  {status}"
        if row["detail"]:
            line += f"  ({row['detail']})"
        lines.append(line)
    passed = sum(row["passed"] for row in rows)
    lines.append(f"{passed}/{len(rows)} checks passed")
    return "\n".join(lines)
