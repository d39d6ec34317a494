import io
import subprocess
import sys
from types import SimpleNamespace

import pytest

from mixinterp import cli
from mixinterp import logic as L
from mixinterp.cli import EXIT_CHECK, EXIT_LIMIT, EXIT_OK, EXIT_USAGE, RunConfig, main, run
from mixinterp.frontend import parse_problem
from mixinterp.verification import OracleConfig, equivalent_within

from conftest import DATA
from test_golden import COMBINED_EXPECTED, formula_over


def _run(path, **kw):
    out, err = io.StringIO(), io.StringIO()
    code = run(RunConfig(str(path), **kw), out, err)
    return code, out.getvalue(), err.getvalue()


def test_sat_problem():
    code, out, _ = _run(DATA / "toy_sat.smt2")
    assert (code, out) == (EXIT_OK, "sat\n")


def test_sat_with_model():
    code, out, _ = _run(DATA / "toy_sat.smt2", print_model=True)
    assert code == EXIT_OK
    assert out.startswith("sat\n(model") and "(define-fun x () Int 0)" in out


@pytest.mark.parametrize("mode", ["pudlak", "mcmillan"])
def test_combined_problem_checks(mode):
    code, out, _ = _run(DATA / "combined.smt2", mode=cli.ProjectionMode(mode), check=True)
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] == "unsat"
    term = parse_problem(
        "\n".join(ln for ln in (DATA / "combined.smt2").read_text().splitlines() if ln.startswith(("(set", "(decl")))
        + f"\n(assert (! {lines[1]} :named A))"
    ).formula("A")
    assert equivalent_within(term, formula_over("combined.smt2", COMBINED_EXPECTED), OracleConfig(codomain=3)) is True
    assert lines[2:] == [
        "check proof: pass",
        "check inductive: pass (selfSolve+boundedOracle)",
        "check contradictory: pass (selfSolve+boundedOracle)",
        "check symbols: pass (syntactic)",
    ]


def test_check_failure_exit_code(monkeypatch):
    monkeypatch.setattr(cli, "interpolate", lambda *a, **k: SimpleNamespace(interpolant=L.TRUE))
    code, out, _ = _run(DATA / "parity.smt2", check=True, extended_branches=True)
    assert code == EXIT_CHECK
    assert "check contradictory: fail" in out


def test_resource_limit():
    code, out, err = _run(DATA / "parity.smt2", budget=1)
    assert (code, out) == (EXIT_LIMIT, "unknown\n")
    assert "resource limit" in err


def test_parse_error_is_positioned(tmp_path):
    bad = tmp_path / "bad.smt2"
    bad.write_text("(set-logic QF_UFLIA)\n(declare-fun x () Int)\n(assert (! (<= x y) :named A))\n")
    code, out, err = _run(bad)
    assert code == EXIT_USAGE and out == ""
    assert err.strip() == f"{bad}:3:18: error: undeclared symbol y"


def test_missing_file(tmp_path):
    code, _, err = _run(tmp_path / "nope.smt2")
    assert code == EXIT_USAGE and "cannot read" in err


def test_proof_out(tmp_path):
    target = tmp_path / "proof.txt"
    code, _, _ = _run(DATA / "eq_chain.smt2", proof_out=str(target))
    text = target.read_text()
    assert code == EXIT_OK and text.startswith("(proof\n") and text.rstrip().endswith(")")


@pytest.mark.parametrize("kw", [dict(budget=0), dict(oracle_bound=0)])
def test_run_config_validation(kw):
    with pytest.raises(ValueError):
        RunConfig("x.smt2", **kw)


@pytest.mark.parametrize("argv", [["--budget", "0", "x"], ["--mode", "other", "x"], []])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == EXIT_USAGE


def test_output_is_deterministic(tmp_path):
    cmd = [sys.executable, "-m", "mixinterp.cli", str(DATA / "combined.smt2"), "--check", "--seed", "7",
           "--extended-branches", "--proof-out"]
    runs = []
    for i in range(2):
        proof = tmp_path / f"p{i}.txt"
        done = subprocess.run(cmd + [str(proof)], capture_output=True, text=True, check=False)
        runs.append((done.returncode, done.stdout, proof.read_text()))
    assert runs[0] == runs[1] and runs[0][0] == EXIT_OK


def test_plain_branching_gives_up_on_parity():
    # needs a branch on a difference; plain branch-and-bound never closes it
    code, out, err = _run(DATA / "parity.smt2")
    assert (code, out) == (EXIT_LIMIT, "unknown\n")
    assert "integer branches" in err
    assert _run(DATA / "parity.smt2", extended_branches=True)[0] == EXIT_OK
