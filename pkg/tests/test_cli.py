import csv
import io
import json
import subprocess
import sys

import pytest

from census_lab import __version__
from census_lab.cli import main, parse_p, parse_p_exact
from census_lab.errors import DomainError
from fractions import Fraction


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    assert code == 0, text
    return json.loads(text)


def assert_provenance(doc):
    assert doc["tool"] == "census-lab" and doc["version"] == __version__
    assert "seed" in doc and doc["arithmetic_mode"] in ("exact", "float")
    assert isinstance(doc["params"], dict)


def test_count():
    doc = run_json("count", "4", "1")
    assert_provenance(doc)
    assert doc["exact"] == "15" and doc["regime"] == "small" and doc["log_asymptotic"] is None
    assert run_json("count", "5", "0")["exact"] == "125"
    big = run_json("count", "100000", "10", "--asymptotic")
    assert big["exact"] is None and big["regime"] == "small"
    assert big["log_asymptotic"] > 0
    small = run_json("count", "30", "30", "--asymptotic")
    assert int(small["exact"]) > 0 and small["regime"] == "large"


def test_count_errors(capsys):
    assert run("count", "200", "300")[0] == 3
    assert run("count", "0", "1")[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["count", "four", "1"])
    assert info.value.code == 2


def test_verify_identity():
    doc = run_json("verify-identity", "8", "1/2")
    assert_provenance(doc)
    assert doc["all_equal"] and doc["failures"] == 0
    assert all(r["equal"] for r in doc["rows"])
    code, text = run("verify-identity", "3", "1/4,1/2,3/4", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    # k = 2 (l = 0) and k = 3 (l = 0, 1) for three tilts
    assert len(rows) == 3 * (1 + 2)
    assert all(r["equal"] == "True" for r in rows)
    assert {r["p"] for r in rows} == {"1/4", "1/2", "3/4"}


def test_verify_identity_decimal_is_exact():
    doc = run_json("verify-identity", "4", "0.1")
    assert doc["params"]["p_list"] == ["1/10"] and doc["all_equal"]


def test_verify_identity_bad_p(capsys):
    assert run("verify-identity", "3", "0")[0] == 2
    assert run("verify-identity", "3", "abc")[0] == 2


def test_parse_p():
    assert parse_p("1/2") == Fraction(1, 2) and parse_p("1") == 1
    assert parse_p("0.25") == 0.25 and isinstance(parse_p("0.25"), float)
    assert parse_p_exact("0.1") == Fraction(1, 10)
    for bad in ("0", "3/2", "-0.5", "1/0", "x"):
        with pytest.raises(DomainError):
            parse_p(bad)


def test_simulate_tree():
    doc = run_json("simulate", "tree", "--k", "3", "--p", "0.5", "--samples", "1000000",
                   "--seed", "5")
    assert_provenance(doc)
    res = doc["result"]
    assert abs(res["mean"] - 32 / 49) <= 4 * res["stderr"]
    assert res["params"]["c"] == 1.5 and res["params"]["epsilon"] == 0.75
    assert doc["seed"] == 5 and res["seed"] == 5


def test_simulate_esc_right_bytes():
    argv = ("simulate", "esc-right", "--eps", "0.2", "--L", "2000", "--samples", "100000",
            "--seed", "8")
    first, second = run(*argv), run(*argv)
    assert first == second and first[0] == 0
    res = json.loads(first[1])["result"]
    assert abs(res["mean"] - 0.2) <= 4 * res["stderr"]


def test_simulate_seed_is_echoed():
    doc = run_json("simulate", "esc-left", "--lam", "1.2", "--L", "50", "--samples", "1000")
    assert isinstance(doc["seed"], int) and doc["result"]["seed"] == doc["seed"]


def test_simulate_mstar_and_a3():
    doc = run_json("simulate", "mstar", "--k", "40", "--p", "1/20", "--samples", "2000",
                   "--seed", "2", "--u-grid", "-1,0,1,5")
    assert doc["arithmetic_mode"] == "exact"
    assert doc["result"]["u_grid"] == [-1.0, 0.0, 1.0, 5.0]
    assert doc["result"]["params"]["c"] == 2.0
    doc = run_json("simulate", "a3", "--k", "3", "--l", "1", "--p", "1/2", "--samples",
                   "200000", "--seed", "3")
    res = doc["result"]
    assert abs(res["mean"] - 0.25) <= 4 * res["stderr"]
    doc = run_json("simulate", "a3", "--k", "60", "--l", "30", "--samples", "5000", "--seed", "4")
    assert doc["result"]["params"]["l"] == 30


def test_simulate_failures(capsys):
    code, _ = run("simulate", "mstar", "--k", "2000", "--p", "0.00001", "--samples", "10",
                  "--seed", "1")
    assert code == 4
    err = json.loads(capsys.readouterr().err)
    assert err["pilot_draws"] == 10_000 and err["error"] == "AcceptanceTooLow"
    assert run("simulate", "tree", "--k", "3")[0] == 2
    assert run("simulate", "esc-left", "--L", "10")[0] == 2


def test_table():
    code, text = run("table", "--k-list", "20,40,80", "--l-rule", "pow:0.4")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "k,l,log_exact,log_asymptotic,rel_log_error,regime"
    rows = list(csv.DictReader(io.StringIO(text)))
    errs = [float(r["rel_log_error"]) for r in rows]
    assert len(rows) == 3 and errs[0] > errs[1] > errs[2]
    assert run("table", "--k-list", "20,40,80", "--l-rule", "pow:0.4") == (code, text)
    code, text = run("table", "--k-list", "5,6", "--l-rule", "const:0")
    assert all(float(r["rel_log_error"]) == 0 for r in csv.DictReader(io.StringIO(text)))
    code, text = run("table", "--k-list", "")
    assert code == 0 and text == "k,l,log_exact,log_asymptotic,rel_log_error,regime\n"
    assert run("table", "--k-list", "10", "--l-rule", "cube:3")[0] == 2


def test_sample_graph():
    code, text = run("sample-graph", "2", "0")
    assert code == 0 and text == "0 1\n"
    code, text = run("sample-graph", "4", "1", "--count", "3", "--seed", "7")
    blocks = text.strip().split("\n\n")
    assert len(blocks) == 3 and all(len(b.splitlines()) == 4 for b in blocks)
    assert run("sample-graph", "4", "1", "--count", "3", "--seed", "7") == (code, text)
    doc = run_json("sample-graph", "5", "2", "--count", "2", "--seed", "1", "--format", "json")
    assert_provenance(doc)
    assert [g["l"] for g in doc["graphs"]] == [2, 2]
    assert all(len(g["edges"]) == 6 for g in doc["graphs"])


def test_sample_graph_errors(capsys):
    assert run("sample-graph", "4", "9")[0] == 2
    assert run("sample-graph", "1", "0")[0] == 2


def test_sample_graph_budget(monkeypatch, capsys):
    monkeypatch.setenv("CENSUS_LAB_CAPS", '{"graph_trials": 50}')
    code, _ = run("sample-graph", "40", "10", "--p", "0.9", "--seed", "1")
    assert code == 4
    assert json.loads(capsys.readouterr().err)["error"] == "BudgetExhausted"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "census_lab", "count", "4", "2"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["exact"] == "6"
