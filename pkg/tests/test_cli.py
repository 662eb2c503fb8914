"""Tests the batch runner of cli.py
"""
import json

import pytest

from equiloc.cli import EXIT_FAIL, EXIT_PASS, main
from equiloc.scenarios import sphere_document

import logging

logger = logging.getLogger(__name__)

FAST = ["--resolution", "32"]


def read_reports(path):
    with open(path, "r") as stream:
        reports = json.load(stream)
    for report in reports:
        report.pop("timings")
    return reports


def test_list(capsys):
    assert main(["list"]) == EXIT_PASS
    listed = capsys.readouterr().out.split()
    assert "s2-dh-a1-b0" in listed
    assert "t2-empty" in listed


def test_theorem1_passes(capsys):
    assert main(["run", "--scenario", "s2-dh-a1-b0", "--checks", "theorem1", "--resolution", "64"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert "s2-dh-a1-b0" in out
    assert "pass" in out
    assert "fail" not in out.split("== ")[0]


def test_all_checks_on_the_degenerate_torus(tmp_path):
    output = tmp_path / "torus.json"
    status = main(["run", "--scenario", "t2-degenerate", "--format", "json", "--output", str(output)] + FAST)
    assert status == EXIT_PASS
    checks = [report["check"] for report in read_reports(output)]
    # corollary 1 does not apply with Y != 0
    assert checks == ["lemmas", "theorem1", "theorem2", "theorem2", "theorem2"]


def test_failures_exit_with_two():
    assert main(["run", "--scenario", "broken-closedness", "--checks", "theorem1"] + FAST) == EXIT_FAIL
    assert main(["run", "--scenario", "no-such-scenario"] + FAST) == EXIT_FAIL
    # an explicitly requested check whose precondition fails
    assert main(["run", "--scenario", "s2-dh-a1-b2", "--checks", "corollary1"] + FAST) == EXIT_FAIL


def test_all_checks_keep_the_commuting_gate(tmp_path):
    document = sphere_document(1, 2)
    document["hypotheses"]["commuting"] = False
    undeclared = tmp_path / "undeclared.json"
    undeclared.write_text(json.dumps(document))
    assert main(["run", "--scenario", str(undeclared)] + FAST) == EXIT_FAIL
    assert main(["run", "--scenario", "broken-commutator"] + FAST) == EXIT_FAIL

    # corollary 1 is the only check skipped for Y != 0
    output = tmp_path / "sphere.json"
    status = main(["run", "--scenario", "s2-dh-a1-b2", "--format", "json", "--output", str(output), "--resolution", "64"])
    assert status == EXIT_PASS
    checks = [report["check"] for report in read_reports(output)]
    assert checks == ["lemmas", "theorem1", "theorem2", "theorem2", "theorem2"]


def test_invalid_arguments():
    for argv in (
        ["run", "--scenario", "t2-empty", "--resolution", "4"],
        ["run", "--scenario", "t2-empty", "--integral-tol", "0"],
        ["run", "--scenario", "t2-empty", "--polynomial", "sin(x)"],
        ["run", "--scenario", "t2-empty", "--checks", "theorem3"],
        ["run"],
    ):
        with pytest.raises(SystemExit):
            main(argv)


def test_json_output_is_deterministic(tmp_path):
    argv = [
        "run",
        "--scenario",
        "s2-euler-a1-b0",
        "--scenario",
        "t2-empty",
        "--checks",
        "theorem1",
        "theorem2",
        "--polynomial",
        "x^2",
        "--format",
        "json",
        "--threads",
        "2",
    ] + FAST
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    assert main(argv + ["--output", str(first)]) == EXIT_PASS
    assert main(argv + ["--output", str(second)]) == EXIT_PASS
    reports = read_reports(first)
    assert reports == read_reports(second)
    assert [(r["scenario"], r["check"]) for r in reports] == [
        ("s2-euler-a1-b0", "theorem1"),
        ("s2-euler-a1-b0", "theorem2"),
        ("t2-empty", "theorem1"),
        ("t2-empty", "theorem2"),
    ]
    euler = reports[0]
    assert euler["verdict"] == "pass"
    assert abs(euler["lhs"]["re"] - 2) < 1e-6
    assert euler["config"]["resolution"] == 32
    assert [c["id"] for c in euler["components"]] == ["north-pole", "south-pole"]


if __name__ == "__main__":
    """
    Tests the batch runner
    """

    # introspect and run all the functions starting with 'test'
    for f in dir():
        if f.startswith("test"):
            print(f)
            globals()[f]()
