"""Command line surface: schemas, determinism, exit codes."""
from __future__ import annotations

import json
import math
import re

import pytest

from spacings.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


ENVELOPE_KEYS = {"config", "diagnostics", "payload", "timestamp", "tool", "version"}


def test_exact_json_envelope(capsys):
    code, env = run_json(capsys, "exact", "--n", "6", "--k", "2")
    assert code == 0
    assert set(env) == ENVELOPE_KEYS
    assert env["tool"] == "spacings exact"
    got = {
        (tuple(r["counts"]), r["hats"]): (r["prob_num"], r["prob_den"])
        for r in env["payload"]["states"]
    }
    assert got == {((0,), 3): (7, 15), ((2,), 2): (8, 15)}


def test_exact_compare_routes(capsys):
    code, env = run_json(capsys, "exact", "--n", "10", "--k", "3", "--compare")
    assert code == 0
    d = env["diagnostics"]
    assert d["methods_agree"] is True
    assert d["total_variation"] == 0.0


def test_exact_csv_schema(capsys):
    code, out = run(capsys, "exact", "--n", "6", "--k", "2", "--format", "csv")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "counts,hats,prob_num,prob_den,prob"
    assert len(lines) == 3
    fields = lines[1].split(",")
    assert fields[:4] == ["0", "3", "7", "15"]
    assert float(fields[4]) == pytest.approx(7 / 15)


def test_simulate_deterministic_output(capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    argv = ("simulate", "--n", "8", "--k", "2", "--replications", "2000", "--seed", "7")
    _, first = run(capsys, *argv, "--threads", "1")
    _, again = run(capsys, *argv, "--threads", "1")
    assert first == again  # byte-identical rerun
    _, fanned = run(capsys, *argv, "--threads", "3")
    env = json.loads(first)
    assert env["timestamp"].startswith("2023-11-14")
    assert env["payload"]["replications"] == 2000
    # statistics never depend on the thread count, only the config echo does
    assert json.loads(fanned)["payload"] == env["payload"]


def test_moments_mean_table(capsys):
    code, env = run_json(capsys, "moments", "--k", "2", "--n-max", "8", "--tables", "mean")
    assert code == 0
    values = env["payload"]["tables"][0]["values"]
    assert values[4][0] == pytest.approx(2 / 3, rel=1e-14)


def test_moments_rejects_unknown_table(capsys):
    with pytest.raises(SystemExit):
        main(["moments", "--k", "2", "--n-max", "8", "--tables", "median"])


def test_asympt_both_routes(capsys):
    code, env = run_json(capsys, "asympt", "--k", "2", "--n-max", "200")
    assert code == 0
    p = env["payload"]
    assert p["quadrature"]["rates"][0] == pytest.approx(math.exp(-2), abs=1e-12)
    assert p["route_gap"]["rates"] < 1e-8
    assert p["quadrature"]["identity_gap"] < 1e-12


def test_report_csv(capsys):
    code, out = run(capsys, "report", "--k-max", "2", "--n-max", "120", "--format", "csv")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "k,quantity,route,i,j,value"
    assert any(line.startswith("2,rate,quadrature,1") for line in lines)


def test_verify_quick_line_per_check(capsys, tmp_path):
    out_file = tmp_path / "verify.json"
    code, out = run(capsys, "verify", "--quick", "--out", str(out_file))
    lines = out.strip().split("\n")
    check_lines = [l for l in lines if re.match(r"^(PASS|FAIL)\s+\d{2} ", l)]
    assert len(check_lines) == 12
    all_passed = all(l.startswith("PASS") for l in check_lines)
    assert code == (0 if all_passed else 1)
    assert re.match(r"^\d+/12 checks passed$", lines[-1])
    report = json.loads(out_file.read_text())
    assert len(report["payload"]["checks"]) == 12


def test_out_dir_env_joins_relative_paths(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SPACINGS_OUT_DIR", str(tmp_path))
    code, _ = run(capsys, "exact", "--n", "4", "--k", "2", "--out", "sub/law.json")
    assert code == 0
    env = json.loads((tmp_path / "sub" / "law.json").read_text())
    assert env["tool"] == "spacings exact"


def test_resource_errors_exit_2(capsys):
    code, _ = run(capsys, "exact", "--n", "100", "--k", "2")
    assert code == 2
    code, _ = run(capsys, "moments", "--k", "1", "--n-max", "10")
    assert code == 2


def test_bad_projection_is_a_usage_error(capsys):
    with pytest.raises(SystemExit):
        main(["simulate", "--n", "10", "--k", "2", "--projection", "1,2"])
