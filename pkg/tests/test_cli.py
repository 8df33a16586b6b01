import json
import subprocess
import sys

import pytest

from horofront.cli import main


@pytest.fixture
def specs(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)

    return {
        "f2": write("f2.json", {"family": "free", "rank": 2}),
        "z1": write("z1.json", {"family": "free_abelian", "dim": 1}),
        "z2": write("z2.json", {"family": "free_abelian", "dim": 2}),
        "dinf": write("dinf.json", {"family": "semidirect", "dim": 1,
                                    "finite_part": {"order": 2, "action_matrices": [[[1]], [[-1]]]}}),
        "kill_b": write("kill_b.json", {"target": {"family": "free_abelian", "dim": 1}, "images": [[1], [0]]}),
        "alpha": write("alpha.json", {"alpha": ["+inf", "-inf"]}),
        "scaled": write("scaled.json", {"type": "scaled", "factor": 3}),
        "bad": write("bad.json", {"family": "nonsense"}),
        "combo_low": write("combo.json", {"type": "max_combo", "M": 1, "quotient": {
            "target": {"family": "free_abelian", "dim": 2}, "images": [[1, 0], [0, 1]]}}),
        "dir": tmp_path,
    }


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_growth_csv(specs, capsys):
    code, out, _ = run(capsys, "growth", "--group", specs["f2"], "--rmax", "3")
    assert code == 0
    assert out.splitlines() == ["r,size", "0,1", "1,5", "2,17", "3,53"]


def test_scan_report(specs, capsys):
    code, out, _ = run(capsys, "scan", "--group", specs["z1"], "-R", "2", "--scan", "10", "--margin", "2")
    assert code == 0
    rep = json.loads(out)
    assert rep["command"] == "scan" and len(rep["result"]["candidates"]) == 2
    assert rep["specs"]["group"]


def test_orbit_from_closed_form(specs, capsys):
    code, out, _ = run(capsys, "orbit", "--group", specs["z2"], "--from", specs["alpha"], "-R", "3")
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "fixed_point"


def test_orbit_from_scan_index(specs, capsys):
    code, out, _ = run(capsys, "orbit", "--group", specs["z1"], "--seed-functional", "0", "-R", "2",
                       "--scan", "10")
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "fixed_point"
    code, _, err = run(capsys, "orbit", "--group", specs["z1"], "--seed-functional", "7", "-R", "2")
    assert code == 2 and "SpecError" in err


def test_verify_free_writes_file(specs, capsys):
    out = specs["dir"] / "sweep.json"
    code, _, _ = run(capsys, "verify-free", "--gmax", "3", "--ymax", "4", "--out", str(out))
    assert code == 0
    res = json.loads(out.read_text())["result"]
    assert res["cases"] > 0 and res["violations"] == []


def test_validate_metric(specs, capsys):
    code, out, _ = run(capsys, "validate-metric", "--group", specs["z1"], "--metric", specs["scaled"], "-R", "6")
    assert code == 0
    verdicts = {v["name"]: v for v in json.loads(out)["result"]["verdicts"]}
    assert verdicts["quasi_isometric"]["details"]["min_nonzero_distance"] == 3


def test_pipeline_va(specs, capsys):
    code, out, _ = run(capsys, "pipeline-va", "--group", specs["dinf"])
    assert code == 0
    assert json.loads(out)["result"]["orbit"]["size"] <= 6


def test_pipeline_detect(specs, capsys):
    code, out, _ = run(capsys, "pipeline-detect", "--group", specs["f2"], "--quotient", specs["kill_b"],
                       "-R", "2", "--scan", "10", "--no-full-scan")
    assert code == 0
    assert json.loads(out)["result"]["f_orbit_size"] == 1


def test_error_exit_codes(specs, capsys):
    code, _, err = run(capsys, "growth", "--group", specs["bad"], "--rmax", "2")
    assert code == 2 and "SpecError" in err
    code, _, err = run(capsys, "growth", "--group", str(specs["dir"] / "missing.json"), "--rmax", "2")
    assert code == 2
    code, _, err = run(capsys, "validate-metric", "--group", specs["f2"], "--metric", specs["combo_low"])
    assert code == 2 and "HypothesisViolation" in err
    code, _, err = run(capsys, "pipeline-detect", "--group", specs["f2"], "--quotient", specs["kill_b"],
                       "-R", "4", "--scan", "12", "--no-full-scan")
    assert code == 2 and "InsufficientScanRadius" in err


def test_reports_are_byte_stable(specs, capsys):
    a = run(capsys, "scan", "--group", specs["z2"], "-R", "3", "--scan", "12", "--margin", "2")[1]
    b = run(capsys, "scan", "--group", specs["z2"], "-R", "3", "--scan", "12", "--margin", "2", "--workers", "2")[1]
    assert a == b


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "horofront.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("horofront ")
