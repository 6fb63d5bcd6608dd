#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
CLI Tests
Subcommands, report formats and exit codes
"""

import json

import pytest

from distribution_auctions.cli import build_parser, build_run_config, main, parse_json_argument
from distribution_auctions.config import Config
from distribution_auctions.errors import AuditFailure, UsageError, ValidationError
from distribution_auctions.runner import AuditRunner

TRUNCATED = '{"buyers":[{"kind":"truncated_er","scale":1,"h":4},{"kind":"truncated_er","scale":1,"h":4}]}'
TWO_POINT = '{"kind":"discrete","support":[{"value":2,"prob":0.5},{"value":1,"prob":0.5}]}'


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_stats_reference_instance(capsys, i1_json):
    code, out = run_cli(capsys, "stats", "--instance", i1_json, "--engine", "exact")
    assert code == 0
    report = json.loads(out)
    assert report["status"] == "ok"
    assert report["result"]["w"] == pytest.approx([1.5, 1.0])
    assert report["result"]["s"] == pytest.approx([1.0, 0.5])
    assert report["result"]["r"] == pytest.approx([2.0, 2.0])
    assert report["meta"]["subcommand"] == "stats"
    assert len(report["meta"]["instance_sha256"]) == 64


def test_stats_from_file(capsys, tmp_path, i1_json):
    path = tmp_path / "i1.json"
    path.write_text(i1_json, encoding="utf-8")
    code, out = run_cli(capsys, "stats", "--instance", str(path), "--output", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "buyer,w,s,r"
    assert lines[1] == "0,1.5,1.0,2.0"


def test_stats_monte_carlo_is_seeded(capsys):
    argv = ("stats", "--instance", TRUNCATED, "--engine", "mc", "--samples", "2000", "--seed", "3")
    first = run_cli(capsys, *argv)
    second = run_cli(capsys, *argv)
    assert first == second
    assert "stderr" in json.loads(first[1])["result"]


def test_run_pm_reference_instance(capsys, i1_json):
    code, out = run_cli(capsys, "run-pm", "--instance", i1_json, "--k", "1")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["revenue"] == pytest.approx(0.5)
    assert result["bound"] == pytest.approx(0.0520833, abs=1e-7)
    assert result["satisfied"] is True


def test_run_pw_csv(capsys, i1_json):
    code, out = run_cli(capsys, "run-pw", "--instance", i1_json, "--output", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "alpha,rev"
    assert len(lines) == 7


def test_reproduce_iid(capsys):
    code, out = run_cli(capsys, "reproduce", "iid", "--n", "2", "--dist", TWO_POINT)
    assert code == 0
    result = json.loads(out)["result"]
    assert result["revenue"] == pytest.approx(1.75)
    assert result["wel"] == pytest.approx(1.75)
    assert result["full_extraction"] is True


def test_ic_audit_command(capsys):
    classes = '[{"kind":"degenerate","value":1},{"kind":"degenerate","value":2}]'
    code, out = run_cli(capsys, "ic-audit", "--mech", '{"mech":"peer_max","k":1}', "--class", classes)
    assert code == 0
    assert json.loads(out)["result"]["max_regret"] <= 1e-9


def test_sweep_is_byte_identical(capsys, tmp_path):
    argv = ["sweep", "--count", "10", "--K", "1", "2", "--seed", "7"]
    first = run_cli(capsys, *argv)
    second = run_cli(capsys, *argv, "--workers", "0")
    assert first == second
    assert first[0] == 0

    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        assert main(argv + ["--output", "csv", "--output-path", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].read_text(encoding="utf-8").startswith("id,n,wel,base_rev,bound,revenue,margin,satisfied")


@pytest.mark.parametrize("argv, expected", [
    ([], 1),
    (["auction"], 1),
    (["stats"], 1),
    (["stats", "--instance", "{}", "--log-level", "chatty"], 1),
    (["stats", "--instance", "{not json"], 2),
    (["stats", "--instance", '{"buyers":[{"kind":"degenerate","value":-1},{"kind":"degenerate","value":1}]}'], 2),
    (["stats", "--instance", "/nonexistent/instance.json"], 2),
    (["stats", "--instance", TRUNCATED], 3),
    (["reproduce", "concentration", "--n", "64", "--trials", "1"], 4),
])
def test_exit_codes(capsys, argv, expected):
    assert main(argv) == expected


def test_capacity_exit_code(capsys, i1_json):
    assert main(["stats", "--instance", i1_json, "--model", "vcg", "--cap", "1"]) == 3
    assert main(["stats", "--instance", i1_json, "--cap", "1"]) == 0


def test_malformed_json_reports_position():
    with pytest.raises(ValidationError) as info:
        parse_json_argument('{"buyers": [1,}', "instance")
    assert "line 1" in str(info.value)


def test_run_config_from_flags(i1_json):
    args = build_parser().parse_args(["sweep", "--count", "5", "--n-max", "3", "--K", "1", "3"])
    run = build_run_config(args)
    assert run.n_range == (2, 3)
    assert run.K == (1, 3)
    assert run.label == "sweep"

    with pytest.raises(UsageError):
        build_parser().parse_args(["run-pm"])


def test_failed_audit_raises_after_writing_report(tmp_path):
    path = tmp_path / "concentration.json"
    args = build_parser().parse_args(
        ["reproduce", "concentration", "--n", "64", "--trials", "1", "--output-path", str(path)])
    with pytest.raises(AuditFailure) as info:
        AuditRunner(Config()).run(build_run_config(args))
    assert info.value.exit_code == 4
    assert json.loads(path.read_text())["status"] == "audit_failed"
