from pathlib import Path
from typing import Dict, Any, List, Optional, Union

import json
import math

import numpy as np
import yaml

from .common import AccuracyTarget, SchemaError, ZetaValue, PoleInfo, as_complex
from .spectral import (
    SpectrumModel,
    circle_spectrum,
    isotropic_torus_spectrum,
    product_spectrum,
    torus_spectrum,
)
from .lattice import QuadraticFormSpec

NUMBER = (int, float)
SCALAR = (int, float, str)
PATH = (str, dict)

COMMANDS = ("epstein", "cs2d", "truncated", "casimir", "det", "anomaly", "orcheck", "selftest")

PARAMS_SPEC: Dict[str, Dict[str, Any]] = {
    "epstein": {
        "dim": int,
        "matrix": list,  # List[List[float]]
        "offset": list,  # List[float]
        "q": SCALAR,
        "s": SCALAR,
        "include_origin": bool,
        "method": str,
    },
    "cs2d": {"a": NUMBER, "b": NUMBER, "c": NUMBER, "q": NUMBER, "s": SCALAR},
    "truncated": {"a": NUMBER, "c": NUMBER, "q": NUMBER, "s": SCALAR, "residue": int},
    "casimir": {"dim": int, "metric": list, "mass": NUMBER},
    "det": {
        "method": str,
        "matrix": list,
        "offset": list,
        "q": NUMBER,
        "include_origin": bool,
        "a": NUMBER,
        "b": NUMBER,
        "c": NUMBER,
        "tau1": NUMBER,
        "tau2": NUMBER,
        "spectrum": PATH,
    },
    "anomaly": {"spectra": list, "q1": NUMBER, "q2": NUMBER, "dim": int},
    "orcheck": {
        "check": str,
        "matrix": list,
        "m": int,
        "ms": list,
        "n": int,
        "alphas": list,
        "eps_step": NUMBER,
    },
    "selftest": {"seed": int},
}

REQUIRED_PARAMS: Dict[str, List[str]] = {
    "epstein": ["matrix", "s"],
    "cs2d": ["a", "b", "c", "s"],
    "truncated": ["a", "c", "q", "s"],
    "casimir": ["metric"],
    "det": ["method"],
    "anomaly": [],
    "orcheck": ["matrix"],
    "selftest": [],
}

ACCURACY_SPEC: Dict[str, Any] = {
    "rel_tol": NUMBER,
    "abs_floor": NUMBER,
    "max_terms": int,
}

JOB_CONFIG_SPEC: Dict[str, Any] = {
    "command": str,
    "params": dict,
    "accuracy": ACCURACY_SPEC,
}

SPECTRUM_SPEC: Dict[str, Any] = {
    "eigenvalues": list,  # List[{"lambda": float, "mult": float}]
    "heat": list,  # List[{"alpha": float, "coeff": float}]
    "small_t": NUMBER,
    "label": str,
    "family": dict,
}

FAMILY_SPEC: Dict[str, Dict[str, Any]] = {
    "circle": {"a": NUMBER, "q": NUMBER, "half_line": bool, "zero_mode": bool, "depth": int},
    "torus": {"matrix": list, "q": NUMBER, "zero_mode": bool, "depth": int},
    "isotropic": {"dim": int, "q": NUMBER, "depth": int},
    "product": {"dim": int, "q1": NUMBER, "q2": NUMBER, "depth": int},
}

FAMILY_REQUIRED: Dict[str, List[str]] = {
    "circle": ["a", "q"],
    "torus": ["matrix", "q"],
    "isotropic": ["dim", "q"],
    "product": ["dim", "q1", "q2"],
}


def _type_name(expected) -> str:
    if isinstance(expected, tuple):
        return " or ".join(t.__name__ for t in expected)
    return expected.__name__


def _check_section(
    section: Dict[str, Any], spec: Dict[str, Any], prefix: str, errors_msg: List[str]
):
    wrong_keys = set(section.keys()).difference(spec.keys())
    if wrong_keys:
        errors_msg.append(
            f"Found unknown keys {sorted(prefix + key for key in wrong_keys)}. "
            f"Expected keys are {[prefix + key for key in spec]}."
        )
    for key, value in section.items():
        if key not in spec:
            continue
        expected_type = spec[key]
        if isinstance(expected_type, dict):
            if not isinstance(value, dict):
                errors_msg.append(
                    f"Wrong type for '{prefix}{key}': expected a mapping, got {type(value).__name__}."
                )
            else:
                _check_section(value, expected_type, f"{prefix}{key}/", errors_msg)
        # bool is an int: only accept it where a bool is expected
        elif not isinstance(value, expected_type) or (
            isinstance(value, bool) and expected_type is not bool
        ):
            errors_msg.append(
                f"Wrong type for '{prefix}{key}': "
                f"expected {_type_name(expected_type)}, got {type(value).__name__}."
            )


def _raise(errors_msg: List[str], file_path: Union[Path, str]):
    raise SchemaError(f"{file_path} validation failed: \n  - " + "\n  - ".join(errors_msg))


def check_params(
    command: str, params: Dict[str, Any], raise_errors: bool = True, prefix: str = "params/"
) -> List[str]:
    """Check the parameters of one command against PARAMS_SPEC"""
    errors_msg: List[str] = []
    if command not in PARAMS_SPEC:
        errors_msg.append(f"Unknown command {command!r}. Expected one of {list(COMMANDS)}.")
    else:
        _check_section(params, PARAMS_SPEC[command], prefix, errors_msg)
        missing = [key for key in REQUIRED_PARAMS[command] if key not in params]
        if missing:
            errors_msg.append(f"Missing required keys {[prefix + key for key in missing]}.")
    if raise_errors and errors_msg:
        _raise(errors_msg, f"{command} parameters")
    return errors_msg


def check_job_config(
    config: Dict[str, Any], raise_errors: bool = True, file_path: Optional[Path] = None
) -> List[str]:
    """Check the validity of a loaded job file

    Parameter
    ---------
    config
        loaded job file as a dict
    raise_errors
        if true raise a SchemaError, otherwise return the list of error messages.
    file_path
        optional job file path. Only used for more explicit error output,
        when raise_errors = True.
    """
    errors_msg: List[str] = []
    if not isinstance(config, dict):
        errors_msg.append(f"Expected a mapping at the top level, got {type(config).__name__}.")
    else:
        _check_section(config, JOB_CONFIG_SPEC, "", errors_msg)
        if "command" not in config:
            errors_msg.append("Missing required key 'command'.")
        elif isinstance(config["command"], str) and isinstance(config.get("params", {}), dict):
            errors_msg.extend(
                check_params(config["command"], config.get("params", {}), raise_errors=False)
            )

    if raise_errors and errors_msg:
        _raise(errors_msg, file_path if file_path is not None else Path("job.yaml"))

    return errors_msg


def parse_job_config(path: Path, check: bool = True) -> Dict[str, Any]:
    """Load a YAML job file

    Parameters
    ----------
    path
       path to the job file
    check
       check the consistency of the job file

    Returns
    -------
    the loaded config as a Dict
    """
    with open(path, "rb") as fd:
        try:
            config = yaml.safe_load(fd)
        except yaml.YAMLError as e:
            raise SchemaError(f"{path}: invalid YAML ({e})")

    if check:
        check_job_config(config, file_path=path)

    return config


def accuracy_from_config(config: Dict[str, Any], **overrides) -> AccuracyTarget:
    """Environment defaults, then the job file's ``accuracy`` section, then
    explicit overrides."""
    settings = dict(config.get("accuracy") or {})
    settings.update({k: v for k, v in overrides.items() if v is not None})
    return AccuracyTarget.from_env(**settings)


def parse_json_argument(text: str, name: str) -> Any:
    """Decode a JSON command line value such as ``"[[2,0],[0,2]]"``."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{name}: invalid JSON {text!r} ({e.msg})")


def _entry(value, name: str) -> complex:
    if isinstance(value, dict):
        if set(value) != {"re", "im"}:
            raise SchemaError(f"{name}: complex entries need exactly the keys 're' and 'im'")
        return complex(value["re"], value["im"])
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise SchemaError(f"{name}: expected a number, got {type(value).__name__}")
    return as_complex(value)


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    """Row-major nested list to a square array; entries may be numbers,
    strings like "1+2i" or {"re": x, "im": y}."""
    if not isinstance(value, list) or not value:
        raise SchemaError(f"{name}: expected a non-empty nested list")
    rows = value if isinstance(value[0], list) else [value]
    if any(not isinstance(row, list) or len(row) != len(rows) for row in rows):
        raise SchemaError(f"{name}: expected a square nested list")
    out = np.array([[_entry(x, name) for x in row] for row in rows])
    if np.all(out.imag == 0):
        return out.real.copy()
    return out


def _level_list(entries: List[Any], keys, name: str):
    first, second = keys
    columns = ([], [])
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or first not in entry:
            raise SchemaError(f"{name}[{i}]: expected a mapping with key {first!r}")
        unknown = set(entry).difference(keys)
        if unknown:
            raise SchemaError(f"{name}[{i}]: unknown keys {sorted(unknown)}")
        try:
            columns[0].append(float(entry[first]))
            columns[1].append(float(entry.get(second, 1.0)))
        except (TypeError, ValueError):
            raise SchemaError(f"{name}[{i}]: entries must be numbers")
    return columns


def _family_spectrum(family: Dict[str, Any]) -> SpectrumModel:
    kind = family.get("kind")
    if kind not in FAMILY_SPEC:
        raise SchemaError(f"family/kind must be one of {list(FAMILY_SPEC)}, got {kind!r}")
    options = {k: v for k, v in family.items() if k != "kind"}
    errors_msg: List[str] = []
    _check_section(options, FAMILY_SPEC[kind], "family/", errors_msg)
    missing = [key for key in FAMILY_REQUIRED[kind] if key not in options]
    if missing:
        errors_msg.append(f"Missing required keys {['family/' + key for key in missing]}.")
    if errors_msg:
        _raise(errors_msg, "spectrum family")
    if kind == "circle":
        return circle_spectrum(**options)
    if kind == "torus":
        form = QuadraticFormSpec(as_matrix(options.pop("matrix"), "family/matrix"))
        return torus_spectrum(form, **options)
    if kind == "isotropic":
        return isotropic_torus_spectrum(**options)
    return product_spectrum(**options)


def spectrum_from_config(config: Dict[str, Any], name: str = "spectrum") -> SpectrumModel:
    """Build a SpectrumModel from a decoded spectrum document.

    Either ``{"eigenvalues": [{"lambda": .., "mult": ..}], "heat": [{"alpha": .., "coeff": ..}]}``
    or ``{"family": {"kind": "circle" | "torus" | "isotropic" | "product", ...}}``.
    """
    errors_msg: List[str] = []
    if not isinstance(config, dict):
        _raise([f"Expected a mapping, got {type(config).__name__}."], name)
    _check_section(config, SPECTRUM_SPEC, "", errors_msg)
    if "family" in config and "eigenvalues" in config:
        errors_msg.append("Give either 'family' or 'eigenvalues', not both.")
    if "family" not in config and "eigenvalues" not in config:
        errors_msg.append("Missing required key 'eigenvalues' (or 'family').")
    if errors_msg:
        _raise(errors_msg, name)

    if "family" in config:
        return _family_spectrum(config["family"])
    lam, mult = _level_list(config["eigenvalues"], ("lambda", "mult"), "eigenvalues")
    alpha, coeff = _level_list(config.get("heat", []), ("alpha", "coeff"), "heat")
    extra = {"small_t": float(config["small_t"])} if "small_t" in config and alpha else {}
    return SpectrumModel.from_levels(
        lam, mult, list(zip(alpha, coeff)), label=config.get("label", name), **extra
    )


def load_spectrum(source: Union[str, Path, Dict[str, Any]]) -> SpectrumModel:
    """Spectrum from a JSON file path or an already decoded mapping."""
    if isinstance(source, dict):
        return spectrum_from_config(source)
    path = Path(source)
    try:
        with open(path) as fd:
            config = json.load(fd)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})")
    return spectrum_from_config(config, name=str(path))


def _float(x: float) -> str:
    if math.isfinite(x):
        text = "%.17g" % x
        return text if any(ch in text for ch in ".e") else text + ".0"
    return json.dumps(str(x))


def to_jsonable(obj: Any) -> Any:
    """Convert results into plain containers; complex numbers become
    {"re": x, "im": y}, arrays become row-major nested lists."""
    if isinstance(obj, ZetaValue):
        return {
            "value": to_jsonable(obj.value),
            "err_estimate": to_jsonable(obj.err_estimate),
            "nearest_pole": to_jsonable(obj.nearest_pole),
            "terms_used": to_jsonable(obj.terms_used),
            "shells_used": to_jsonable(obj.shells_used),
            "accuracy_floor_reached": to_jsonable(obj.accuracy_floor_reached),
            "underflow": to_jsonable(obj.underflow),
        }
    if isinstance(obj, PoleInfo):
        return {
            "location": float(obj.location),
            "residue": to_jsonable(obj.residue),
            "distance": float(obj.distance),
        }
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _dump(obj: Any, indent: str) -> str:
    inner = indent + "  "
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_dump(v, inner)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + indent + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_dump(v, inner) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _dump(v, inner) for v in obj) + "\n" + indent + "]"
    if isinstance(obj, float):
        return _float(obj)
    return json.dumps(obj)


def encode_result(record: Dict[str, Any]) -> str:
    """Deterministic JSON text with every float at 17 significant digits.

    >>> encode_result({"value": 0.1 + 0j})
    '{\\n  "value": {\\n    "re": 0.10000000000000001,\\n    "im": 0.0\\n  }\\n}'
    """
    return _dump(to_jsonable(record), "")
