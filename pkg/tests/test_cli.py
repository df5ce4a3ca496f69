import csv
import json
from pathlib import Path

import pytest

from robinlab.cli import main
from robinlab.config import ConfigError, load_config, parse_config

CONFIGS = Path(__file__).resolve().parents[1] / "scripts" / "configs"

SANDWICH = {
    "experiment": "sandwich",
    "domain": {"type": "interval", "n": 16},
    "kappa": {"atoms": [{"position": 0.0, "weight": 1.0}, {"position": 1.0, "weight": 1.0}]},
    "theta": {"pairs": [{"p": 0.0, "q": 1.0, "weight": 1.0}]},
    "t_grid": [0.01, 1.0],
}


def _write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if isinstance(data, dict) else data)
    return str(path)


def _report(out):
    return json.loads((Path(out) / "report.json").read_text())


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_shipped_configs_pass(tmp_path, name):
    assert main(["run", str(CONFIGS / name), "--out", str(tmp_path)]) == 0
    assert _report(tmp_path)["passed"]


def test_expected_violation_counts_as_pass(tmp_path):
    assert main(["run", _write(tmp_path, SANDWICH), "--out", str(tmp_path / "o")]) == 0
    checks = {c["name"]: c for c in _report(tmp_path / "o")["checks"]}
    neu = checks["neumann_domination"]
    assert neu["expect"] == "violation" and not neu["passed"] and neu["verdict"]


def test_too_tight_tolerance_fails_with_exit_one(tmp_path):
    cfg = dict(SANDWICH, experiment="gamma", tolerances={"gamma": 1e-300})
    assert main(["run", _write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 1
    assert not _report(tmp_path / "o")["passed"]


@pytest.mark.parametrize("mutate", [
    lambda d: d["theta"]["pairs"][0].update(weight=-1.0),
    lambda d: d.update(experiment="nope"),
    lambda d: d["domain"].update(n=0),
    lambda d: d.update(t_grid=[]),
    lambda d: d["theta"]["pairs"][0].update(q=0.01),
    lambda d: d.update(domain={"type": "interval", "n": 1}),
], ids=["negative-weight", "unknown-experiment", "zero-cells", "empty-grid", "diagonal-pair", "no-interior"])
def test_malformed_config_exits_two(tmp_path, mutate, capsys):
    data = json.loads(json.dumps(SANDWICH))
    mutate(data)
    out = tmp_path / "o"
    assert main(["run", _write(tmp_path, data), "--out", str(out)]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert not out.exists()


def test_config_error_names_the_field():
    data = json.loads(json.dumps(SANDWICH))
    data["theta"]["pairs"][0]["weight"] = -1.0
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert info.value.path == "theta/pairs/0/weight"


@pytest.mark.parametrize("text", ["{not json", '{"experiment": "sandwich", "lam": NaN}'])
def test_invalid_json_is_config_error(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, text))


def test_missing_file_exits_two(tmp_path):
    assert main(["run", str(tmp_path / "absent.json")]) == 2


@pytest.mark.parametrize("flag", [["--tol", "0"], ["--threads", "0"]])
def test_bad_flags_exit_two(tmp_path, flag):
    assert main(["run", _write(tmp_path, SANDWICH), "--out", str(tmp_path / "o"), *flag]) == 2


def test_convergence_rejects_uncharged_boundary(tmp_path):
    cfg = {"experiment": "convergence", "domain": {"type": "interval", "n": 16},
           "theta": {"pairs": [{"p": 0.0, "q": 1.0, "weight": 1.0}]}}
    assert main(["run", _write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 2


def test_rerun_is_identical_except_timings(tmp_path):
    path = _write(tmp_path, dict(SANDWICH, experiment="gamma"))
    main(["run", path, "--out", str(tmp_path / "a"), "--threads", "1"])
    main(["run", path, "--out", str(tmp_path / "b")])
    a, b = _report(tmp_path / "a"), _report(tmp_path / "b")
    a.pop("timings"), b.pop("timings")
    assert a == b


def test_report_structure_and_csv(tmp_path):
    assert main(["run", str(CONFIGS / "convergence_1d.json"), "--out", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert set(rep) == {"artifact_version", "config", "passed", "checks", "tables", "timings"}
    assert set(rep["checks"][0]) >= {"name", "passed", "worst_violation", "witness", "tolerance", "expect", "verdict"}
    with open(tmp_path / "convergence.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["scaling", "distance", "quadratic_value", "monotone"]
    assert len(rows) == len(rep["config"]["scalings"])


def test_eigen_table_has_oracle_columns(tmp_path):
    cfg = {"experiment": "eigen", "domain": {"type": "interval", "n": 64},
           "kappa": SANDWICH["kappa"], "theta": SANDWICH["theta"]}
    assert main(["run", _write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 0
    header = (tmp_path / "o" / "eigenvalues.csv").read_text().splitlines()[0]
    assert header == "index,eigenvalue,oracle,relative_error"
