"""Jobs: one evaluation request, validated, dispatched and turned into a
JSON-ready record. Every command line subcommand goes through
:func:`run_command`.
"""
import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import io
from .common import (
    DEFAULT_ACCURACY,
    AccuracyTarget,
    DomainError,
    SchemaError,
    SingularTermError,
    ZetaError,
    abort,
    as_complex,
    as_real,
    success,
)
from .epstein import (
    chowla_selberg_2d,
    epstein_2d_inhomogeneous,
    epstein_inhomogeneous,
    epstein_massless_recursive,
    inhomogeneous_poles,
)
from .lattice import EpsteinParams, QuadraticFormSpec, direct_lattice_sum
from .opreg import (
    MatrixFunctionCache,
    ORProblem,
    feynman_schwinger_bridge,
    finite_part_expression,
    or_laurent_coefficients,
    or_multi_power,
    or_regularized_power,
    schwinger_log,
)
from .physics import (
    DeterminantValue,
    TorusModuli2D,
    TorusSpec,
    casimir_energy_torus,
    det_torus_2d,
    det_torus_teichmuller,
    log_det_torus,
)
from .spectral import AnomalyInput, anomaly_four_torus, commuting_pair, multiplicative_anomaly, zeta_log_det
from .truncated import TruncatedParams, truncated_residue, truncated_zeta

# parameters given on the command line as JSON text
JSON_PARAMS = ("matrix", "offset", "metric", "alphas", "ms")

DET_REQUIRED = {
    "torus": ["matrix"],
    "binary": ["a", "b", "c"],
    "moduli": ["tau1", "tau2"],
    "spectrum": ["spectrum"],
}

OR_CHECKS = ("power", "multi", "log", "bridge", "laurent")


@dataclass(frozen=True)
class JobRequest:
    """A command with its parameters, schema-checked on construction."""

    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    acc: AccuracyTarget = DEFAULT_ACCURACY
    timing: bool = False

    def __post_init__(self):
        io.check_params(self.command, self.params)

    @classmethod
    def from_config(
        cls,
        config: Dict[str, Any],
        timing: bool = False,
        file_path: Optional[Path] = None,
        **overrides,
    ) -> "JobRequest":
        io.check_job_config(config, file_path=file_path)
        acc = io.accuracy_from_config(config, **overrides)
        return cls(config["command"], dict(config.get("params") or {}), acc, timing)


def _require(params: Dict[str, Any], keys: List[str], what: str):
    missing = [key for key in keys if key not in params]
    if missing:
        raise SchemaError(f"{what} needs {['params/' + key for key in missing]}")


def _check_dim(params: Dict[str, Any], p: int):
    if "dim" in params and params["dim"] != p:
        raise DomainError(f"dim = {params['dim']} does not match the {p}x{p} matrix")


def _determinant(det: DeterminantValue) -> Dict[str, Any]:
    # the determinant itself is only reported while it is representable
    value = det.value if abs(det.log_value) < 700 else None
    return {"log_value": det.log_value, "value": value, "err_estimate": det.err_estimate}


def _run_epstein(params: Dict[str, Any], acc: AccuracyTarget) -> Dict[str, Any]:
    form = QuadraticFormSpec(io.as_matrix(params["matrix"]))
    _check_dim(params, form.p)
    s = as_complex(params["s"])
    q = as_complex(params.get("q", 0))
    experimental = q.imag != 0 or q.real < 0
    epstein = EpsteinParams(
        form, params.get("offset"), q if experimental else q.real, experimental=experimental
    )
    include_origin = params.get("include_origin", q != 0)
    method = params.get("method", "series")

    if method == "direct":
        value = direct_lattice_sum(epstein, s, excludes_origin=not include_origin, acc=acc)
    elif method != "series":
        raise SchemaError(f"params/method must be 'series' or 'direct', got {method!r}")
    elif q == 0:
        if include_origin:
            raise SingularTermError("the n = 0 term 0^{-s} is singular for q = 0")
        if np.any(epstein.c != 0):
            raise DomainError("q = 0 is only supported without an offset")
        value = epstein_massless_recursive(form, s, acc)
    else:
        value = epstein_inhomogeneous(epstein, s, acc, include_origin=include_origin)

    result: Dict[str, Any] = {"value": value}
    if q != 0:
        result["poles"] = [
            {"location": location, "residue": residue}
            for location, residue in inhomogeneous_poles(epstein, count=3)
        ]
    return result


def _run_cs2d(params: Dict[str, Any], acc: AccuracyTarget) -> Dict[str, Any]:
    a, b, c = params["a"], params["b"], params["c"]
    q = as_real(params.get("q", 0), "q")
    s = as_complex(params["s"])
    if q == 0:
        value = chowla_selberg_2d(a, b, c, s, acc)
    else:
        value = epstein_2d_inhomogeneous(a, b, c, q, s, acc)
    return {"value": value, "discriminant": 4 * a * c - b * b}


def _run_truncated(params: Dict[str, Any], acc: AccuracyTarget) -> Dict[str, Any]:
    truncated = TruncatedParams(params["a"], params["c"], params["q"])
    outcome = truncated_zeta(truncated, params["s"], acc)
    result: Dict[str, Any] = {
        "value": outcome.as_zeta_value(),
        "smallest_term": outcome.smallest_term,
    }
    if "residue" in params:
        residue = truncated_residue(truncated, params["residue"], acc)
        result["residue"] = {
            "j": residue.j,
            "closed_form": residue.closed_form,
            "extracted": residue.extracted_value,
            "extracted_err": residue.extracted_err,
            "ratio": residue.ratio,
        }
    return result


def _run_casimir(params: Dict[str, Any], acc: AccuracyTarget) -> Dict[str, Any]:
    torus = TorusSpec(io.as_matrix(params["metric"], "metric"), params.get("mass", 0.0))
    _check_dim(params, torus.d)
    energy = casimir_energy_torus(torus, acc)
    return {
        "energy": energy.energy,
        "full_zeta": energy.full_zeta,
        "volume_term": energy.volume_term,
        "pole_residue": energy.pole_residue,
    }


def _run_det(params: Dict[str, Any], acc: AccuracyTarget) -> Dict[str, Any]:
    method = params["method"]
    if method not in DET_REQUIRED:
        raise SchemaError(f"params/method must be one of {list(DET_REQUIRED)}, got {method!r}")
    _require(params, DET_REQUIRED[method], f"det --method {method}")
    if method == "torus":
        form = QuadraticFormSpec(io.as_matrix(params["matrix"]))
        epstein = EpsteinParams(form, params.get("offset"), params.get("q", 0.0))
        det = log_det_torus(epstein, acc, include_origin=params.get("include_origin", True))
    elif method == "binary":
        det = det_torus_2d(params["a"], params["b"], params["c"], params.get("q", 0.0), acc)
    elif method == "moduli":
        det = det_torus_teichmuller(TorusModuli2D(params["tau1"], params["tau2"]), acc)
    else:
        log_det = zeta_log_det(io.load_spectrum(params["spectrum"]), acc)
        det = DeterminantValue(log_det.real, log_det.err_estimate)
    return _determinant(det)


def _run_anomaly(params: Dict[str, Any], acc: AccuracyTarget) -> Dict[str, Any]:
    if "spectra" in params:
        spectra = params["spectra"]
        if len(spectra) != 3:
            raise SchemaError("params/spectra needs three entries: A, B and AB")
        pair = AnomalyInput(*(io.load_spectrum(source) for source in spectra))
    else:
        _require(params, ["q1", "q2", "dim"], "anomaly without spectra")
        pair = commuting_pair(params["q1"], params["q2"], params["dim"])
    result: Dict[str, Any] = {"anomaly": multiplicative_anomaly(pair, acc)}
    if params.get("dim") == 4 and "spectra" not in params:
        result["closed_form"] = anomaly_four_torus(params["q1"], params["q2"])
    return result


def _deviation(result, exact: np.ndarray) -> Dict[str, Any]:
    return {
        "value": result.value,
        "err_estimate": result.err_estimate,
        "exact": exact,
        "max_deviation": float(np.max(np.abs(result.value - exact))),
    }


def _run_orcheck(params: Dict[str, Any], acc: AccuracyTarget) -> Dict[str, Any]:
    check = params.get("check", "power")
    if check not in OR_CHECKS:
        raise SchemaError(f"params/check must be one of {list(OR_CHECKS)}, got {check!r}")
    H = io.as_matrix(params["matrix"])
    m, n = params.get("m", 1), params.get("n", 1)
    alphas = params.get("alphas")
    eps_step = params.get("eps_step", 0.02)
    cache = MatrixFunctionCache.from_matrix(H)

    if check == "power":
        return _deviation(or_regularized_power(ORProblem(H, m, n, alphas), eps_step), cache.power(-m))
    if check == "multi":
        _require(params, ["ms"], "orcheck --check multi")
        ms = params["ms"]
        return _deviation(or_multi_power(H, ms, n, alphas, eps_step), cache.power(-sum(ms)))
    if check == "log":
        return _deviation(schwinger_log(H, n, eps_step), cache.log())
    if check == "bridge":
        exact, bridged = feynman_schwinger_bridge(H, m, eps_step)
        return _deviation(bridged, exact)

    problem = ORProblem(H, m, n, alphas)
    coeffs = or_laurent_coefficients(H, m, -n, n)
    exact = cache.power(-m)
    return {
        "coefficients": coeffs,
        "pole_coefficients_max": float(np.max(np.abs(coeffs[:n]))),
        "c0_deviation": float(np.max(np.abs(coeffs[n] - exact))),
        "finite_part_deviation": float(np.max(np.abs(finite_part_expression(problem) - exact))),
    }


def _run_selftest(params: Dict[str, Any], acc: AccuracyTarget) -> Dict[str, Any]:
    from .selftest import run_selftest

    results = run_selftest(params.get("seed", 0), acc)
    return {
        "checks": [r.as_dict() for r in results],
        "passed": all(r.passed for r in results),
    }


RUNNERS: Dict[str, Callable[[Dict[str, Any], AccuracyTarget], Dict[str, Any]]] = {
    "epstein": _run_epstein,
    "cs2d": _run_cs2d,
    "truncated": _run_truncated,
    "casimir": _run_casimir,
    "det": _run_det,
    "anomaly": _run_anomaly,
    "orcheck": _run_orcheck,
    "selftest": _run_selftest,
}


def run_command(req: JobRequest) -> Dict[str, Any]:
    """Evaluate a job; the record echoes its input and accuracy settings.

    Library errors propagate; their ``exit_status`` is the status the
    command line uses.
    """
    start = time.perf_counter()
    result = RUNNERS[req.command](req.params, req.acc)
    elapsed = time.perf_counter() - start
    record: Dict[str, Any] = {
        "command": req.command,
        "input": req.params,
        "accuracy": {
            "rel_tol": req.acc.rel_tol,
            "abs_floor": req.acc.abs_floor,
            "max_terms": req.acc.max_terms,
        },
        "result": result,
    }
    if req.timing:
        record["timing"] = {"seconds": elapsed}
    return record


def emit(record: Dict[str, Any]) -> int:
    """Write a record to stdout and return the exit status."""
    if record["command"] == "selftest":
        from .selftest import format_table

        print(format_table(record["result"]["checks"], color=sys.stdout.isatty()))
        return 0 if record["result"]["passed"] else 1
    print(io.encode_result(record))
    return 0


def execute(build: Callable[[], JobRequest]):
    """Build and run a request; errors become a one-line message on stderr
    and the matching exit status."""
    try:
        req = build()
        start = time.perf_counter()
        record = run_command(req)
    except ZetaError as e:
        abort(f"{type(e).__name__}: {e}", e.exit_status)
    except OSError as e:
        abort(f"{e.filename}: {e.strerror}", 1)
    success(f"{req.command} finished in {time.perf_counter() - start:.3f} s")
    status = emit(record)
    if status:
        sys.exit(status)


def add_accuracy_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--tol", type=float, default=None, help="Relative tolerance (default 1e-12)")
    parser.add_argument(
        "--abs-floor", type=float, default=None, help="Absolute floor below which terms are dropped"
    )
    parser.add_argument(
        "--max-terms", type=int, default=None, help="Cap on the number of series terms"
    )
    parser.add_argument(
        "--timing", action="store_true", help="Include the wall-clock time in the JSON record"
    )


def accuracy_from_args(args) -> AccuracyTarget:
    return AccuracyTarget.from_env(
        rel_tol=args.tol, abs_floor=args.abs_floor, max_terms=args.max_terms
    )


def params_from_args(command: str, args) -> Dict[str, Any]:
    params = {}
    for key in io.PARAMS_SPEC[command]:
        value = getattr(args, key, None)
        if value is None:
            continue
        if key in JSON_PARAMS:
            value = io.parse_json_argument(value, key)
        params[key] = value
    return params


def _epstein_arguments(parser):
    parser.add_argument("--dim", type=int, help="Lattice dimension p, checked against the matrix")
    parser.add_argument("--matrix", required=True, help='Matrix A of Q(n) = n^T A n / 2, e.g. "[[2,0],[0,2]]"')
    parser.add_argument("--offset", help="Offset vector c as JSON (default 0)")
    parser.add_argument("--q", default=None, help="Constant q (default 0)")
    parser.add_argument("--s", required=True, help='Evaluation point, e.g. "3+0.5i"')
    parser.add_argument(
        "--include-origin",
        dest="include_origin",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Include the n = 0 term (default: yes for q != 0)",
    )
    parser.add_argument("--method", choices=["series", "direct"], default=None)


def _cs2d_arguments(parser):
    for name in ("a", "b", "c"):
        parser.add_argument(f"--{name}", type=float, required=True)
    parser.add_argument("--q", type=float, default=None, help="Constant q (default 0)")
    parser.add_argument("--s", required=True)


def _truncated_arguments(parser):
    parser.add_argument("--a", type=float, required=True)
    parser.add_argument("--c", type=float, required=True, help="Offset c")
    parser.add_argument("--q", type=float, required=True)
    parser.add_argument("--s", required=True)
    parser.add_argument(
        "--residue", type=int, default=None, help="Also report the residue at s = 1/2 - J", metavar="J"
    )


def _casimir_arguments(parser):
    parser.add_argument("--dim", type=int)
    parser.add_argument("--metric", required=True, help='Torus metric g as JSON, e.g. "[1]"')
    parser.add_argument("--mass", type=float, default=None)


def _det_arguments(parser):
    parser.add_argument("--method", choices=list(DET_REQUIRED), required=True)
    parser.add_argument("--matrix")
    parser.add_argument("--offset")
    parser.add_argument("--q", type=float, default=None)
    parser.add_argument(
        "--include-origin", dest="include_origin", action=argparse.BooleanOptionalAction, default=None
    )
    for name in ("a", "b", "c", "tau1", "tau2"):
        parser.add_argument(f"--{name}", type=float)
    parser.add_argument("--spectrum", help="Spectrum JSON file")


def _anomaly_arguments(parser):
    parser.add_argument("--spectra", nargs=3, metavar=("A", "B", "AB"), help="Three spectrum JSON files")
    parser.add_argument("--q1", type=float)
    parser.add_argument("--q2", type=float)
    parser.add_argument("--dim", type=int, choices=[1, 2, 4])


def _orcheck_arguments(parser):
    parser.add_argument("--check", choices=OR_CHECKS, default=None)
    parser.add_argument("--matrix", required=True, help="Hermitian positive-definite matrix as JSON")
    parser.add_argument("--m", type=int)
    parser.add_argument("--ms", help="Exponents m_1..m_r as JSON, for --check multi")
    parser.add_argument("--n", type=int, help="Loop order")
    parser.add_argument("--alphas", help="Arbitrary constants alpha_1..alpha_n as JSON")
    parser.add_argument("--eps-step", dest="eps_step", type=float)


def _selftest_arguments(parser):
    parser.add_argument("--seed", type=int, default=None, help="Seed of the randomized draws")


class Subcommand:
    """A subcommand with the make_parser/main pair the CLI expects."""

    def __init__(self, name: str, description: str, arguments: Callable):
        self.name = name
        self.description = description
        self.arguments = arguments

    def make_parser(self, parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        parser.description = self.description
        self.arguments(parser)
        add_accuracy_arguments(parser)
        return parser

    def main(self, args):
        execute(
            lambda: JobRequest(
                self.name, params_from_args(self.name, args), accuracy_from_args(args), args.timing
            )
        )


SUBCOMMANDS = (
    Subcommand("epstein", "Inhomogeneous Epstein zeta of a p-dimensional lattice.", _epstein_arguments),
    Subcommand("cs2d", "Two-dimensional Epstein zeta (Chowla-Selberg type series).", _cs2d_arguments),
    Subcommand("truncated", "Truncated zeta sum_{n>=0} [a (n + c)^2 + q]^{-s}.", _truncated_arguments),
    Subcommand("casimir", "Casimir energy zeta(-1/2) on a flat torus.", _casimir_arguments),
    Subcommand("det", "Zeta-regularized determinant.", _det_arguments),
    Subcommand("anomaly", "Multiplicative anomaly of a commuting pair.", _anomaly_arguments),
    Subcommand("orcheck", "Operator-regularization identities on a finite matrix.", _orcheck_arguments),
    Subcommand("selftest", "Run the invariant suite and print a pass/fail table.", _selftest_arguments),
)


def make_parser(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    """Parser of the ``run`` subcommand."""
    parser.description = "Run a YAML job file with keys command, params and accuracy."
    parser.add_argument("jobfile", type=Path, help="Path to the job file")
    add_accuracy_arguments(parser)
    return parser


def main(args):
    execute(
        lambda: JobRequest.from_config(
            io.parse_job_config(args.jobfile, check=False),
            timing=args.timing,
            file_path=args.jobfile,
            rel_tol=args.tol,
            abs_floor=args.abs_floor,
            max_terms=args.max_terms,
        )
    )
