import json
import subprocess
import sys

import numpy as np
import pytest

from chicap.cli import RunConfig, main, run
from chicap.io import channel_to_dict


def run_cli(*args, env=None):
    proc = subprocess.run(
        [sys.executable, "-m", "chicap", *args], capture_output=True, text=True, env=env
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_disturbance_report():
    code, out, _ = run_cli("disturbance", "--channel", "dephasing", "--ensemble", "zero-plus")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == 1
    assert rep["inputs"]["channel"] == "dephasing"
    assert rep["tolerances"]["tol_eig"] == 1e-12
    d = rep["result"]["disturbance"]
    assert abs(d["nats"] - 0.200733976360852) < 1e-12
    assert abs(d["bits"] - d["nats"] / np.log(2)) < 1e-12


def test_reports_are_byte_identical():
    a = run_cli("chi-capacity", "--channel", "dephasing", "--hamiltonian", "diag:0,1", "--energy", "0.2", "--restarts", "2")
    b = run_cli("chi-capacity", "--channel", "dephasing", "--hamiltonian", "diag:0,1", "--energy", "0.2", "--restarts", "2")
    assert a[0] == 0 and a[1] == b[1]
    block = json.loads(a[1])["result"]["chi_capacity"]
    assert abs(block["nats"] - 0.5004024235381879) < 1e-6
    assert block["certificate"]["passed"]


def test_units(capsys):
    assert main(["entropy", "--state", "diag:0.5,0.5", "--unit", "bits"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert abs(rep["result"]["entropy"]["value"] - 1.0) < 1e-12


def test_gibbs(capsys):
    assert main(["gibbs", "--hamiltonian", "diag:0,1", "--energy", "0.2"]) == 0
    assert abs(json.loads(capsys.readouterr().out)["result"]["lambda"] - np.log(4)) < 1e-10


def test_validation_failures_exit_2(tmp_path, capsys):
    assert main(["gibbs", "--hamiltonian", "diag:0,1", "--energy", "-1"]) == 2
    assert main(["entropy", "--state", "diag:0.7,0.7"]) == 2
    bad = tmp_path / "ch.json"
    bad.write_text('{"dim_in": 2,\n "dim_out": 2,\n "kraus": [\n}')
    assert main(["chi-capacity", "--channel", str(bad)]) == 2
    assert f"{bad}:4:1" in capsys.readouterr().err
    assert main(["chi-capacity", "--channel", "nonsense"]) == 2
    assert main(["entropy", "--state", "diag:1,0", "--tol", "tol_bogus=1"]) == 2


def test_schema_errors_are_line_precise(tmp_path, capsys):
    p = tmp_path / "mu.json"
    p.write_text('{"schema": 1,\n "members": [\n  {"weight": 0.5, "state": {"pure": [1, 0]}},\n  {"weight": 0.5, "state": {"pure": [1, "x"]}}\n ]\n}\n')
    assert main(["chi", "--ensemble", str(p)]) == 2
    err = capsys.readouterr().err
    assert f"{p}:4:" in err and "members[1].state.pure[1]" in err


def test_run_config_defaults():
    cfg = RunConfig(command="gibbs", hamiltonian="diag:0,1", energy=0.2, out=None)
    assert cfg.seed == 0 and cfg.unit == "nats"
    assert run(cfg) == 0


def test_non_convergence_exit_3(monkeypatch, capsys):
    from chicap import cli
    from chicap.capacity import CapacityResult

    def stalled(*args, **kwargs):
        return CapacityResult(value=0.1, optimizer=np.eye(2) / 2, converged=False)

    monkeypatch.setattr(cli, "ea_capacity", stalled)
    assert main(["ea-capacity", "--channel", "identity"]) == 3
    assert json.loads(capsys.readouterr().out)["status"] == "not-converged"


def test_channel_file_and_csv(tmp_path, capsys):
    p = tmp_path / "pi.json"
    from chicap.channels import dephasing_channel

    p.write_text(json.dumps(channel_to_dict(dephasing_channel())))
    out = tmp_path / "sweep.csv"
    assert main(["sweep-appendix", "--channel", str(p), "--ensemble", "zero-plus", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,dim,chi_n,chi_limit,residual"
    assert len(lines) == 5


def test_config_env(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"numerics": {"tolerances": {"tol_trace": 1e-3}}}))
    import os

    env = dict(os.environ, CHICAP_CONFIG=str(cfg))
    code, out, _ = run_cli("entropy", "--state", "diag:0.5,0.5001", env=env)
    assert code == 0
    assert json.loads(out)["tolerances"]["tol_trace"] == 1e-3
    assert run_cli("entropy", "--state", "diag:0.5,0.5001")[0] == 2


def test_gaussian_classify(tmp_path, capsys):
    p = tmp_path / "att.json"
    p.write_text(json.dumps({"s_A": 1, "s_B": 1, "K": (np.sqrt(0.5) * np.eye(2)).tolist(), "alpha": (0.25 * np.eye(2)).tolist()}))
    assert main(["gaussian-classify", "--gaussian", str(p)]) == 0
    rep = json.loads(capsys.readouterr().out)["result"]
    assert rep["valid"] and rep["classification"]["verdict"] == "gap>0 guaranteed"


def test_remaining_commands(capsys):
    assert main(["verify-identity", "--channel", "random", "--ensemble", "zero-plus"]) == 0
    assert main(["coherent-info", "--channel", "dephasing", "--state", "diag:0.8,0.2"]) == 0
    assert main(["chi", "--ensemble", "basis", "--channel", "depolarizing"]) == 0
    assert main(["sweep-truncation", "--ensemble", "zero-plus", "--dims", "1,2"]) == 0
    assert main(["gap", "--channel", "identity", "--hamiltonian", "diag:0,1", "--energy", "0.2", "--restarts", "2"]) == 0
    capsys.readouterr()


def test_selftest():
    code, out, _ = run_cli("selftest")
    assert code == 0
    assert json.loads(out)["result"]["passed"]
