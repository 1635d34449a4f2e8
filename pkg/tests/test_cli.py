import json
import os
import subprocess
import sys
from pathlib import Path

from fmr.cli import run_command

GOLDEN = Path(__file__).resolve().parents[1] / "src" / "fmr" / "golden"


def _write_spec(tmp_path, doc, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def test_validate_all_ones(capsys):
    rc = run_command(["validate", str(GOLDEN / "m2_z2.json")])
    out = capsys.readouterr().out
    assert rc == 0 and "valid" in out


def test_validate_invalid_sigma(tmp_path, capsys):
    spec = _write_spec(
        tmp_path,
        {
            "name": "bad",
            "base": {"kind": "zmod", "n": 3},
            "construction": {
                "kind": "sigma",
                "n": 3,
                "multipliers": [
                    {"i": 1, "j": 2, "k": 1, "value": 0},
                    {"i": 2, "j": 3, "k": 2, "value": 1},
                    {"i": 1, "j": 3, "k": 1, "value": 1},
                ],
                "default": 1,
            },
        },
    )
    rc = run_command(["validate", spec])
    out = capsys.readouterr().out
    assert rc == 1
    assert "identity-violation" in out


def test_malformed_spec_is_invalid_input(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert run_command(["validate", str(path)]) == 2


def test_missing_file_is_invalid_input():
    assert run_command(["build", "/nonexistent/spec.json"]) == 2


def test_normalize_roundtrip(tmp_path, capsys):
    spec = _write_spec(
        tmp_path,
        {
            "name": "split-classes",
            "base": {"kind": "zmod", "n": 3},
            "construction": {
                "kind": "sigma",
                "n": 3,
                "multipliers": [
                    {"i": 1, "j": 3, "k": 1, "value": 1},
                    {"i": 3, "j": 1, "k": 3, "value": 1},
                    {"i": 1, "j": 3, "k": 2, "value": 1},
                    {"i": 3, "j": 1, "k": 2, "value": 1},
                    {"i": 2, "j": 1, "k": 3, "value": 1},
                    {"i": 2, "j": 3, "k": 1, "value": 1},
                ],
                "default": 0,
            },
        },
    )
    rc = run_command(["normalize", spec])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.splitlines()[0] == "tau: 1 3 2"
    assert "block-orders: 2 1" in out
    # the emitted normalized spec is itself a valid spec document
    json_start = out.index("\n{") + 1
    doc = json.loads(out[json_start:])
    normalized = _write_spec(tmp_path, doc, "normalized.json")
    assert run_command(["validate", normalized]) == 0
    capsys.readouterr()


def test_aut_table(capsys):
    rc = run_command(["aut", str(GOLDEN / "t2_z3.json")])
    out = capsys.readouterr().out
    assert rc == 0
    table = dict(line.split(": ") for line in out.strip().splitlines())
    assert table["Aut"] == "6" and table["In"] == "6" and table["Out"] == "1"


def test_aut_budget_exit_code():
    assert run_command(["aut", str(GOLDEN / "t3_z2.json"), "--cap", "2"]) == 3


def test_build_info(capsys):
    rc = run_command(["build", str(GOLDEN / "t3_z2.json"), "--info"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "order: 64" in out
    assert "zero-trace-ideals: true" in out
    assert "units: 8" in out


def test_verify_exit_zero(capsys):
    rc = run_command(["verify", str(GOLDEN / "t3_z2.json"), "--results", "all"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "fail=0" in out


def test_verify_subset_json(capsys):
    rc = run_command(
        ["verify", str(GOLDEN / "t2_z2.json"), "--results", "Cor-9.3,Thm-9.1", "--format", "json"]
    )
    out = capsys.readouterr().out
    assert rc == 0
    doc = json.loads(out)
    # checks are reported in canonical id order regardless of selection order
    assert [c["id"] for c in doc["checks"]] == ["Thm-9.1", "Cor-9.3"]
    assert all(c["outcome"] == "pass" for c in doc["checks"])
    assert all(c["millis"] is None for c in doc["checks"])


def test_verify_unknown_id_exit_code():
    assert (
        run_command(["verify", str(GOLDEN / "t2_z2.json"), "--results", "Nope-1"]) == 2
    )


def test_report_document(capsys):
    rc = run_command(["report", str(GOLDEN / "t2_z2.json")])
    out = capsys.readouterr().out
    assert rc == 0
    doc = json.loads(out)
    assert doc["order"] == 8
    assert doc["subgroup_orders"]["Aut"] == 2
    assert doc["verification"]["summary"]["fail"] == 0


def test_fmr_threads_env_rejected_when_bad(tmp_path, monkeypatch):
    monkeypatch.setenv("FMR_THREADS", "zero")
    assert run_command(["validate", str(GOLDEN / "m2_z2.json")]) == 2


def test_byte_identical_across_threads():
    env1 = dict(os.environ, FMR_THREADS="1")
    env2 = dict(os.environ, FMR_THREADS="7")
    cmd = [
        sys.executable,
        "-m",
        "fmr.cli",
        "verify",
        str(GOLDEN / "t2_z2.json"),
        "--results",
        "all",
        "--format",
        "json",
    ]
    r1 = subprocess.run(cmd, capture_output=True, env=env1)
    r2 = subprocess.run(cmd, capture_output=True, env=env2)
    assert r1.returncode == 0 and r2.returncode == 0
    assert r1.stdout == r2.stdout
