import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from rgverify import cli, multdep
from rgverify.cli import EXIT_FINDING, EXIT_OK, EXIT_USAGE, _cell, load_schema, run


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def report(*argv):
    code, text, _ = invoke(*argv, "--format", "json")
    return code, json.loads(text)


INVOCATIONS = [
    ("solve", "--n", 31),
    ("solve", "--n", 8191, "--min-m", 3, "--prime-only"),
    ("coincidence", "--base-limit", 100, "--value-cap", "1e9"),
    ("certify", "--table1"),
    ("certify", "--ptable"),
    ("certify", "--lemma31", "--k", 2),
    ("certify", "--findings"),
    ("lattice", "--family", "power", "--c", 0.5, "--theta", 1.5, "--m", 400, "--delta", 0.001, "--k", 2),
    ("lattice", "--family", "f_N", "--n", 31, "--m", 4, "--delta", 0.01),
    ("lattice", "--random", 3, "--seed", 5),
    ("linform", "--n", 31),
    ("linform", "--loglog-n", 40),
    ("bounds", "--loglog-n", 40),
    ("bounds", "--loglog-n", "44.9432", "--theorem", 1),
    ("bounds", "--n", 31),
    ("multdep", "--limit", 100, "--verify-known"),
    ("multdep", "--pair", 3, 4),
]


@pytest.mark.parametrize("argv", INVOCATIONS, ids=lambda a: " ".join(map(str, a)))
def test_reports_validate_against_schema(argv):
    code, rep = report(*argv)
    assert code == EXIT_OK
    jsonschema.validate(rep, load_schema(argv[0]))
    assert rep["status"] == "pass" and rep["subcommand"] == argv[0]
    assert rep["version"] and rep["config"]["precision_digits"] >= 30


def test_solve_example():
    code, rep = report("solve", "--n", 31, "--min-m", 2)
    assert code == EXIT_OK
    assert rep["extra"]["items"] == [[2, 5], [5, 3], [30, 2]]
    assert rep["extra"]["tail_sum"] == "7/30"


def test_multdep_example_full_limit():
    code, rep = report("multdep", "--limit", 100000, "--verify-known")
    assert code == EXIT_OK
    assert rep["extra"]["golden_matched"] and rep["extra"]["count"] == 11


def test_certify_table1_example():
    code, rep = report("certify", "--table1")
    assert code == EXIT_OK and len(rep["rows"]) == 6


def test_bounds_report_fields():
    _, rep = report("bounds", "--n", 31)
    t1, t2 = rep["rows"]
    assert t1["exact_tail"] == "7/30" and t2["exact_tail"] == "1/5"
    assert t1["regime"] == "t1_small_n" and "small-n-head" in t1["findings"]
    _, rep = report("bounds", "--loglog-n", "44.9432", "--theorem", 1)
    assert rep["rows"][0]["covering"] == "t1_mtilde6;t1_mtilde5"


def test_bounds_sweep_file(tmp_path):
    path = tmp_path / "sweep.csv"
    code, rep = report("bounds", "--sweep", path, "--points", 200)
    assert code == EXIT_OK and rep["extra"]["sweep"]["violations"] == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 400
    assert {"LL", "regime", "printed_track", "printed_constant"} <= set(rows[0])


# ---------------------------------------------------------------------------
# exit codes


def test_golden_mismatch_exits_one(monkeypatch):
    real = multdep.load_golden
    monkeypatch.setattr(multdep, "load_golden", lambda: real()[1:])
    code, rep = report("multdep", "--limit", 100, "--verify-known")
    assert code == EXIT_FINDING and rep["status"] == "finding"
    assert rep["extra"]["golden_matched"] is False


def test_unexpected_coincidence_exits_one(monkeypatch):
    monkeypatch.setattr(cli, "KNOWN_COINCIDENCES", {31})
    code, rep = report("coincidence", "--base-limit", 100, "--value-cap", "1e9")
    assert code == EXIT_FINDING and rep["extra"]["unknown_values"] == [8191]


@pytest.mark.parametrize("argv", [
    ("nosuch",),
    ("solve",),
    ("solve", "--n", "abc"),
    ("solve", "--n", "1e19"),
    ("solve", "--n", 31, "--precision", 20),
    ("solve", "--n", 31, "--workers", 0),
    ("bounds", "--n", 10**19),
    ("bounds", "--n", 31, "--log-n", 3),
    ("bounds",),
    ("linform", "--loglog-n", 10),
    ("lattice", "--family", "power"),
    ("lattice", "--family", "power", "--m", 10, "--delta", "0.7"),
    ("certify",),
    ("certify", "--table1", "--ptable"),
    ("multdep", "--pair", 5, 5),
    ("coincidence", "--base-limit", "1e5", "--value-cap", "1e30", "--budget", 10),
    ("multdep", "--limit", 10**6),
])
def test_usage_and_budget_errors_exit_two(argv):
    code, out, err = invoke(*argv)
    assert code == EXIT_USAGE
    assert out == "" and err


def test_large_n_goes_through_log_scale():
    code, rep = report("bounds", "--log-n", "1e50", "--theorem", 2)
    assert code == EXIT_OK and rep["rows"][0]["regime"] == "t2_tail"


# ---------------------------------------------------------------------------
# formats and determinism


@pytest.mark.parametrize("argv", [("solve", "--n", 8191), ("multdep", "--limit", 1000), ("bounds", "--loglog-n", 50)])
def test_csv_and_json_agree(argv):
    _, rep = report(*argv)
    _, text, _ = invoke(*argv, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == len(rep["rows"])
    for got, want in zip(rows, rep["rows"]):
        assert set(want) <= set(got)
        assert got == {k: _cell(want.get(k)) for k in got}


def test_tty_format():
    code, text, _ = invoke("solve", "--n", 31, "--format", "tty")
    assert code == EXIT_OK
    assert "status: pass" in text and "tail_sum: 7/30" in text
    assert text.splitlines()[-1].split() == ["30", "2"]


@pytest.mark.parametrize("argv", [
    ("coincidence", "--base-limit", 300, "--value-cap", "1e15"),
    ("multdep", "--limit", 2000),
    ("lattice", "--family", "xlogx", "--c", 0.3, "--m", 3000, "--delta", 0.02),
])
def test_output_independent_of_workers(argv):
    _, one = report(*argv, "--workers", 1)
    _, three = report(*argv, "--workers", 3)
    assert one["config"].pop("workers") == 1 and three["config"].pop("workers") == 3
    assert one == three


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    assert report("solve", "--n", 31)[1]["config"]["workers"] == 3
    monkeypatch.setenv(cli.WORKERS_ENV, "junk")
    assert report("solve", "--n", 31)[1]["config"]["workers"] == 1


def test_precision_recorded():
    assert report("solve", "--n", 31, "--precision", 60)[1]["config"]["precision_digits"] == 60


def test_repeated_runs_are_identical():
    assert invoke("bounds", "--loglog-n", 70) == invoke("bounds", "--loglog-n", 70)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rgverify", "solve", "--n", "31"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["extra"]["tail_sum"] == "7/30"
    proc = subprocess.run([sys.executable, "-m", "rgverify", "solve"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage" in proc.stderr
