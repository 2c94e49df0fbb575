import json
import math
from pathlib import Path

import pytest
import yaml

from spectral_zeta import __version__
from spectral_zeta.__main__ import main
from spectral_zeta.common import SchemaError
from spectral_zeta.jobs import JobRequest, run_command

CATALAN = 0.915965594177219015
SQUARE_AT_2 = 4 * math.pi ** 2 / 6 * CATALAN


def run_cli(capsys, *argv):
    main(list(argv))
    captured = capsys.readouterr()
    return json.loads(captured.out), captured.err


def run_failing(capsys, *argv):
    with pytest.raises(SystemExit) as e:
        main(list(argv))
    return e.value.code, capsys.readouterr().err


def test_no_command(capsys):
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 1
    assert "usage: spectral-zeta" in capsys.readouterr().out


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_cs2d(capsys):
    record, err = run_cli(capsys, "cs2d", "--a", "1", "--b", "0", "--c", "1", "--s", "2")
    assert record["command"] == "cs2d"
    assert record["input"] == {"a": 1.0, "b": 0.0, "c": 1.0, "s": "2"}
    assert record["accuracy"]["rel_tol"] == 1e-12
    assert record["result"]["value"]["value"]["re"] == pytest.approx(SQUARE_AT_2, rel=1e-12)
    assert record["result"]["discriminant"] == 4.0
    assert "cs2d finished" in err


def test_epstein_massless_default(capsys):
    record, _ = run_cli(capsys, "epstein", "--matrix", "[[2,0],[0,2]]", "--s", "2")
    assert record["result"]["value"]["value"]["re"] == pytest.approx(SQUARE_AT_2, rel=1e-12)
    assert "poles" not in record["result"]


def test_epstein_massive(capsys):
    record, _ = run_cli(
        capsys, "epstein", "--matrix", "[[2,0],[0,2]]", "--q", "1", "--s", "3+0.5i", "--no-include-origin"
    )
    assert record["input"]["include_origin"] is False
    poles = record["result"]["poles"]
    assert poles[0]["location"] == 1.0
    assert poles[0]["residue"] == pytest.approx(math.pi)


def test_epstein_direct_method(capsys):
    record, _ = run_cli(
        capsys, "epstein", "--matrix", "[[2]]", "--s", "2", "--method", "direct", "--tol", "1e-10"
    )
    assert record["accuracy"]["rel_tol"] == 1e-10
    assert record["result"]["value"]["value"]["re"] == pytest.approx(math.pi ** 4 / 45, rel=1e-6)


@pytest.mark.parametrize(
    "argv, status, message",
    [
        (["epstein", "--matrix", "[[2,0],[0,2]]", "--q", "1", "--s", "1"], 2, "PoleError"),
        (["epstein", "--matrix", "[[2,0],[0,2]]", "--s", "2", "--include-origin"], 2, "SingularTermError"),
        (["epstein", "--matrix", "[[2,0],[0,2]", "--s", "2"], 1, "invalid JSON"),
        (["epstein", "--matrix", "[[1,2],[2,1]]", "--q", "1", "--s", "2"], 2, "DomainError"),
        (["epstein", "--matrix", "[[2]]", "--dim", "2", "--s", "2"], 2, "does not match"),
        (["det", "--method", "torus"], 1, "params/matrix"),
        (["epstein", "--matrix", "[[2,0],[0,2]]", "--q", "1", "--s", "2", "--max-terms", "10"], 3, "ConvergenceError"),
    ],
)
def test_errors(capsys, argv, status, message):
    code, err = run_failing(capsys, *argv)
    assert code == status
    assert message in err


def test_truncated_residue(capsys):
    record, _ = run_cli(
        capsys, "truncated", "--a", "0.5", "--c", "0.3", "--q", "2", "--s", "2", "--residue", "1"
    )
    assert record["result"]["residue"]["j"] == 1
    assert record["result"]["residue"]["ratio"] == pytest.approx(2.0, rel=1e-6)
    # at a/q = 1/4 the asymptotic floor exceeds the default tolerance
    assert record["result"]["value"]["accuracy_floor_reached"] is True


def test_casimir(capsys):
    record, _ = run_cli(capsys, "casimir", "--metric", "[1]")
    assert record["result"]["energy"]["value"]["re"] == pytest.approx(-1 / 6, rel=1e-12)
    assert record["result"]["pole_residue"] is None


def test_det_binary(capsys):
    record, _ = run_cli(capsys, "det", "--method", "binary", "--a", "1", "--b", "0", "--c", "1", "--q", "1")
    result = record["result"]
    assert result["value"] == pytest.approx(math.exp(result["log_value"]))


def test_det_spectrum_file(capsys, tmpdir):
    path = Path(str(tmpdir)) / "levels.json"
    path.write_text(json.dumps({"eigenvalues": [{"lambda": 2.0}, {"lambda": 3.0, "mult": 2}]}))
    record, _ = run_cli(capsys, "det", "--method", "spectrum", "--spectrum", str(path))
    assert record["result"]["log_value"] == pytest.approx(math.log(18.0))


def test_det_missing_spectrum_file(capsys, tmpdir):
    missing = Path(str(tmpdir)) / "missing.json"
    code, err = run_failing(capsys, "det", "--method", "spectrum", "--spectrum", str(missing))
    assert code == 1
    assert str(missing) in err


def test_anomaly_finite_spectra(capsys, tmpdir):
    base = Path(str(tmpdir))
    paths = []
    for name, levels in (("A", [1.0, 2.0]), ("B", [3.0, 5.0]), ("AB", [3.0, 10.0])):
        path = base / f"{name}.json"
        path.write_text(json.dumps({"eigenvalues": [{"lambda": x} for x in levels]}))
        paths.append(str(path))
    record, _ = run_cli(capsys, "anomaly", "--spectra", *paths)
    assert record["result"]["anomaly"]["value"]["re"] == pytest.approx(0, abs=1e-12)
    assert "closed_form" not in record["result"]


@pytest.mark.parametrize("check", ["power", "multi", "log", "bridge"])
def test_orcheck(capsys, check):
    record, _ = run_cli(
        capsys,
        "orcheck",
        "--check",
        check,
        "--matrix",
        "[[2,0.5],[0.5,1]]",
        "--m",
        "2",
        "--n",
        "2",
        "--ms",
        "[1,1]",
        "--alphas",
        "[0.5,-1]",
    )
    assert record["result"]["max_deviation"] < 1e-6


def test_orcheck_laurent(capsys):
    record, _ = run_cli(capsys, "orcheck", "--check", "laurent", "--matrix", "[[2,0.5],[0.5,1]]", "--n", "2")
    result = record["result"]
    assert len(result["coefficients"]) == 5
    assert result["pole_coefficients_max"] < 1e-12
    assert result["c0_deviation"] < 1e-12
    assert result["finite_part_deviation"] < 1e-12


def test_run_job_file(capsys, tmpdir):
    path = Path(str(tmpdir)) / "job.yaml"
    with open(path, "w") as fh:
        yaml.dump(
            {
                "command": "cs2d",
                "params": {"a": 1.0, "b": 0.0, "c": 1.0, "s": 2.0},
                "accuracy": {"rel_tol": 1e-10},
            },
            fh,
        )
    record, _ = run_cli(capsys, "run", str(path), "--timing")
    assert record["accuracy"]["rel_tol"] == 1e-10
    assert record["timing"]["seconds"] >= 0
    assert record["result"]["value"]["value"]["re"] == pytest.approx(SQUARE_AT_2, rel=1e-10)

    record, _ = run_cli(capsys, "run", str(path), "--tol", "1e-8")
    assert record["accuracy"]["rel_tol"] == 1e-8


def test_run_invalid_job_file(capsys, tmpdir):
    path = Path(str(tmpdir)) / "job.yaml"
    path.write_text("command: cs2d\nparams:\n  a: 1\n")
    code, err = run_failing(capsys, "run", str(path))
    assert code == 1
    assert f"{path} validation failed" in err

    code, err = run_failing(capsys, "run", str(Path(str(tmpdir)) / "absent.yaml"))
    assert code == 1
    assert "absent.yaml" in err


def test_run_command_record():
    record = run_command(JobRequest("cs2d", {"a": 1.0, "b": 0.0, "c": 1.0, "s": 2.0}))
    assert set(record) == {"command", "input", "accuracy", "result"}
    assert record["result"]["value"].value.real == pytest.approx(SQUARE_AT_2, rel=1e-12)


def test_job_request_validates():
    with pytest.raises(SchemaError, match="params/s"):
        JobRequest("cs2d", {"a": 1.0, "b": 0.0, "c": 1.0})
