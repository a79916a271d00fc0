import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from ksdioph.cli import main


@pytest.fixture(scope="module")
def field_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("fields") / "sqrt2.field"
    path.write_text("minpoly = [-2, 0, 1]\nprecision = 256\n")
    return str(path)


@pytest.fixture(scope="module")
def q_field_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("fields") / "q.field"
    path.write_text("minpoly = [0, 1]\nprecision = 128\n")
    return str(path)


def test_field_report(field_file, capsys):
    assert main(["field", "--field", field_file]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["discriminant"] == 8
    assert report["degree"] == 2


def test_field_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.field"
    bad.write_text("minpoly = [1, 0, 1]\n")
    assert main(["field", "--field", str(bad)]) == 1


def test_dirichlet_sweep(field_file, tmp_path):
    out = tmp_path / "d.jsonl"
    code = main(["dirichlet", "--field", field_file, "--m", "1",
                 "--x", "0.30103;0.77815", "--Q", "2,4,8", "--out", str(out)])
    assert code == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(rows) == 3
    for row in rows:
        assert row["value"] <= row["value_bound"] * (1 + 1e-9)
        assert row["house_q"] <= row["house_bound"] * (1 + 1e-9)


def test_flow_trace_csv_slope(q_field_file, tmp_path):
    out = tmp_path / "trace.csv"
    code = main(["flow-trace", "--field", q_field_file, "--m", "1",
                 "--x-rational", "1/3", "--t-max", "6", "--step", "0.5",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,delta,certified,witness,log_delta"
    rows = [line.split(",") for line in lines[1:]]
    ts = np.array([float(r[0]) for r in rows])
    logs = np.array([float(r[-1]) for r in rows])
    tail = ts >= 2.0
    slope = np.polyfit(ts[tail], logs[tail], 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.01)  # -d with d = 1


def test_flow_trace_jsonl(field_file, tmp_path):
    out = tmp_path / "trace.jsonl"
    code = main(["flow-trace", "--field", field_file, "--m", "1",
                 "--x", "0.37;0.58", "--t-max", "1.0", "--step", "0.5",
                 "--format", "json", "--out", str(out)])
    assert code == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert set(rows[0]) == {"t", "delta", "certified", "witness", "log_delta"}


def test_exponent_csv(q_field_file, tmp_path):
    out = tmp_path / "eta.csv"
    code = main(["exponent", "--field", q_field_file, "--m", "1",
                 "--x", "0.6180339887", "--t-min", "8", "--t-max", "512",
                 "--points", "8", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,eta"
    assert len(lines) == 9


def test_construct_verify_pipeline(field_file, tmp_path):
    cert = tmp_path / "cert.json"
    code = main(["construct", "--field", field_file, "--surface", "product:3",
                 "--zeta", "inv_pow:2", "--stages", "3", "--out", str(cert)])
    assert code == 0
    code = main(["verify", "--certificate", str(cert), "--out",
                 str(tmp_path / "report.json")])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["verified"] is True


def test_verify_rejects_tampered(field_file, tmp_path):
    cert = tmp_path / "cert.json"
    main(["construct", "--field", field_file, "--stages", "3",
          "--out", str(cert)])
    data = json.loads(cert.read_text())
    data["stages"][1]["q"] = data["stages"][0]["q"]
    data["stages"][1]["phi_value"] = data["stages"][0]["phi_value"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["verify", "--certificate", str(bad), "--out",
                 str(tmp_path / "r2.json")]) == 1


def test_paucity_deterministic_bytes(field_file, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        code = main(["paucity", "--field", field_file, "--m", "1",
                     "--samples", "3", "--t-max", "4", "--seed", "9",
                     "--out", str(path)])
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_merging(field_file, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"field = {field_file}\n")
    assert main(["field", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["discriminant"] == 8


def test_console_script_entrypoint(field_file):
    proc = subprocess.run([sys.executable, "-m", "ksdioph.cli", "field",
                           "--field", field_file],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["degree"] == 2


def test_flow_trace_budget_exit_code(field_file, tmp_path):
    out = tmp_path / "t.csv"
    code = main(["flow-trace", "--field", field_file, "--m", "1",
                 "--x", "0.37;0.58", "--t-max", "1.0", "--step", "0.5",
                 "--cap", "1", "--out", str(out)])
    assert code == 2
