import json
import subprocess
import sys

import numpy as np
import pytest

from htme.cli import main
from htme.evolution import read_csv
from htme.io import canonical_json


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def _err(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_simulate_tls_writes_csv_and_summary(tmp_path):
    cfg = _write(tmp_path, {"scenario": "tls", "generator": "lindblad", "params": {"beta_T": 0.1}})
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out-dir", str(out)]) == 0
    head, data = read_csv(out / "trajectory.csv")
    assert head == ["t", "sz", "sp", "sm"]
    assert data.shape == (200, 4)
    text = (out / "summary.json").read_text()
    summary = json.loads(text)
    assert canonical_json(summary) == text
    assert summary["deviations"]["max_relative"] <= 1e-8
    assert summary["rates"]["labels"] == ["I", "x", "y", "z"]


def test_simulate_singlet_triplet_summary(tmp_path):
    cfg = _write(tmp_path, {"scenario": "singlet_triplet", "generator": "htme"})
    assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["labels"] == ["I", "Z", "S", "D"]
    assert len(s["sigma_matrix"]) == 4
    assert set(s["oracle_sigma"]) == {"ZI", "DD", "ZS", "SZ", "DZ", "ZD"}
    head, _ = read_csv(tmp_path / "trajectory.csv")
    assert head == ["t", "Z", "S", "D"]


def test_config_list_fans_out(tmp_path):
    cfg = _write(tmp_path, [{"scenario": "tls", "generator": "arh"}, {"scenario": "lowT"}])
    assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "run0" / "summary.json").exists()
    assert (tmp_path / "run1" / "trajectory.csv").exists()


def test_custom_scenario(tmp_path):
    params = {
        "h_s": [[0.5, 0], [0, -0.5]], "couplings": [[[0, 1], [1, 0]]],
        "spectral": {"kind": "bosonic_radiative"}, "beta_T": 1.0,
        "rho0": [[1, 0], [0, 0]], "t_max": 3.0, "observables": {"sz": [[1, 0], [0, -1]]},
    }
    cfg = _write(tmp_path, {"scenario": "custom", "generator": "lindblad", "params": params})
    assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    head, data = read_csv(tmp_path / "trajectory.csv")
    assert head == ["t", "sz"] and data[0, 1] == 1.0


def test_rates_verb_does_not_write_trajectory(tmp_path, capsys):
    cfg = _write(tmp_path, {"scenario": "singlet_triplet", "generator": "arh"})
    assert main(["rates", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["oracle_sigma"]["ZS"] == 0.0
    assert not (tmp_path / "trajectory.csv").exists()
    assert json.loads((tmp_path / "rates.json").read_text()) == printed


@pytest.mark.parametrize("content", [
    "{not json",
    {"scenario": "tls", "generator": "htme", "spectral_mode": "quantum"},
    {"scenario": "tls", "bogus": 1},
    {"scenario": "singlet_triplet", "generator": "lindblad"},
])
def test_config_errors_exit_2(tmp_path, capsys, content):
    cfg = _write(tmp_path, content)
    assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)]) == 2
    err = _err(capsys)
    assert err["code"] == 2 and err["message"]


def test_missing_config_exit_2(tmp_path, capsys):
    assert main(["rates", "--config", str(tmp_path / "nope.json")]) == 2
    assert _err(capsys)["code"] == 2


def test_numerical_failure_exit_3(tmp_path, capsys):
    params = {
        "h_s": [[0.5, 0], [0, -0.5]], "couplings": [[[0, 1], [1, 0]]],
        "spectral": {"kind": "bosonic_radiative", "scale": 1e300}, "beta_T": 1.0,
        "rho0": [[1, 0], [0, 0]], "t_max": 1e10,
    }
    cfg = _write(tmp_path, {"scenario": "custom", "generator": "lindblad", "params": params})
    with np.errstate(all="ignore"):
        code = main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)])
    assert code == 3
    assert _err(capsys)["code"] == 3


def test_check_passes_and_tampered_check_fails(capsys, monkeypatch):
    monkeypatch.setenv("HTME_SEED", "7")
    assert main(["check", "--level", "fast"]) == 0
    table = capsys.readouterr().out
    assert "gibbs_stationarity" in table and "FAIL" not in table
    assert main(["check", "--inject-fault", "lindblad_sign"]) == 1
    captured = capsys.readouterr()
    assert "gibbs_stationarity" in json.loads(captured.err)["message"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "htme", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "simulate" in r.stdout
