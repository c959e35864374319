import json
from pathlib import Path

import numpy as np
import pytest

from singcoint.cli import main
from singcoint.io import read_table_csv, spec_from_dict, spec_to_dict
from singcoint.simulate import dgp_to_spec, draw_dgp

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_granger_on_two_variable_spec(tmp_path, capsys):
    code, _, _ = run(["granger", "--spec", str(CONFIGS / "two_variable_spec.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "granger.json").read_text())
    beta = np.array(doc["beta"])[:, 0]
    assert abs(beta[0] / beta[1] - 0.5 / -1.5) < 1e-12
    assert set(doc) >= {"A", "A_star", "alpha", "beta", "h", "C0"}


def test_mc_writes_tables_idempotently(tmp_path, capsys):
    args = ["mc", "--T", "60", "--reps", "2", "--seed", "1", "--out", str(tmp_path)]
    assert run(args, capsys)[0] == 0
    first = {p: (tmp_path / p).read_bytes() for p in ("table1.csv", "table1.md")}
    assert run(args, capsys)[0] == 0
    assert first == {p: (tmp_path / p).read_bytes() for p in ("table1.csv", "table1.md")}
    assert first["table1.csv"].startswith(b"T,lag,estimator,rmse,n_reps,n_failures")


def test_mc_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "mc.json"
    cfg.write_text(json.dumps({"T_list": [50], "replications": 3, "lags_report": [0, 2]}))
    assert run(["mc", "--config", str(cfg), "--reps", "1", "--out", str(tmp_path)], capsys)[0] == 0
    body = (tmp_path / "table1.csv").read_text().splitlines()
    assert len(body) == 1 + 2 * 3 and body[1].endswith(",1,0")


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"replications": 2, "bogus": 1}))
    code, _, err = run(["mc", "--config", str(cfg)], capsys)
    assert code != 0
    record = json.loads(err.strip().splitlines()[-1])
    assert record["error"] == "ConfigError" and "bogus" in record["message"]
    assert "replications" in record["message"]


def test_runtime_error_gives_json_record(tmp_path, capsys):
    code, _, err = run(["granger", "--spec", str(tmp_path / "missing.json")], capsys)
    assert code == 1
    assert json.loads(err.strip())["command"] == "granger"


def test_simulate_path_and_panel(tmp_path, capsys):
    code, _, _ = run(["simulate", "--config", str(CONFIGS / "simulate_panel.json"), "--out", str(tmp_path)],
                     capsys)
    assert code == 0
    F = read_table_csv(tmp_path / "path.csv")
    assert F.shape == (300, 1 + 4 + 3)
    x = read_table_csv(tmp_path / "panel.csv")
    assert x.shape == (300, 7)


def test_irf_theoretical_and_estimated(tmp_path, capsys):
    assert run(["irf", "--out", str(tmp_path / "a")], capsys)[0] == 0
    theo = read_table_csv(tmp_path / "a" / "irf.csv")
    assert theo.shape == (81, 13)
    draw = draw_dgp(0)
    assert np.allclose(theo[0, 1:].reshape(4, 3), draw.C0)
    cfg = tmp_path / "irf.json"
    cfg.write_text(json.dumps({"estimator": "VECM", "T": 300, "H": 10}))
    assert run(["irf", "--config", str(cfg), "--out", str(tmp_path / "b")], capsys)[0] == 0
    assert read_table_csv(tmp_path / "b" / "irf.csv").shape == (11, 13)


def test_ptdecomp(tmp_path, capsys):
    spec, _ = dgp_to_spec(draw_dgp(0))
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec_to_dict(spec)))
    assert run(["ptdecomp", "--spec", str(path), "--out", str(tmp_path)], capsys)[0] == 0
    doc = json.loads((tmp_path / "ptdecomp.json").read_text())
    assert doc["n_permanent"] == 1 and doc["n_transitory"] == 2
    assert np.allclose(doc["xi"], spec.xi)


def test_spec_document_round_trip():
    spec, _ = dgp_to_spec(draw_dgp(1))
    back = spec_from_dict(json.loads(json.dumps(spec_to_dict(spec))))
    assert back.S.max_abs_diff(spec.S) == 0 and np.array_equal(back.D, spec.D)
    with pytest.raises(ValueError, match="valid keys"):
        spec_from_dict({**spec_to_dict(spec), "extra": 1})


def test_verify_subset(tmp_path, capsys):
    cfg = tmp_path / "v.json"
    cfg.write_text(json.dumps({"checks": ["two_variable_oracle", "resultant", "irf_invariance"]}))
    code, out, _ = run(["verify", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 0
    assert out.count("[PASS]") == 3
    report = json.loads((tmp_path / "verify.json").read_text())
    assert all(item["passed"] for item in report)


def test_threads_env_default(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("SINGCOINT_THREADS", "2")
    assert run(["mc", "--T", "50", "--reps", "2", "--out", str(tmp_path)], capsys)[0] == 0
