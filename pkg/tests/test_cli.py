from __future__ import annotations

import json
import subprocess
import sys
from fractions import Fraction

import pytest

from levode import RationalFn, SymMatrix
from levode.cli import main
from levode.system_model import (
    STANDARD,
    Monomial,
    ProblemSpec,
    serialize_problem,
    validate,
)

S2_STRINGS = [
    ["(-3)/(x^6)", "0", "(6)/(x^6)"],
    ["(252*x^3 + 72)/(x^9)", "0", "(-24)/(5*x^6)"],
    ["0", "0", "(-3)/(x^6)"],
]


def run_cli(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_problem(tmp_path, doc: dict, name: str = "problem.json") -> str:
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def fixture_document() -> dict:
    from levode.fixtures import builtin_hypergeometric

    return serialize_problem(builtin_hypergeometric())


def undominated_problem() -> ProblemSpec:
    # valid, but the two exponents cross at x = 200, far beyond X = 5:
    # no solution dominates on [X, infinity)
    return validate(ProblemSpec(
        n=2,
        N=0,
        d_large=(),
        d_small=(Fraction(0), Fraction(3, 8)),
        rho=Monomial(Fraction(1), 0),
        lam=Monomial(Fraction(1), 1),
        phi1_large=(),
        phi1_small=(RationalFn.const(0), RationalFn.parse("(-75)/(x)")),
        ladder=(),
        E1=SymMatrix.zeros(2),
        a=Fraction(1),
        K=1,
        L=1,
        M=2,
        mode=STANDARD,
        X=Fraction(5),
    ))


# -- transform ----------------------------------------------------------

def test_transform_reports_first_correction(capsys):
    code, out, _ = run_cli(
        capsys, "transform", "--builtin", "hypergeom", "--format", "json"
    )
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == 1
    assert report["iterations"][0]["S"] == S2_STRINGS
    assert report["ledger"]["entries"][0]["stage"] == 1
    assert 0 < report["total_error_bound"] < 1e-7


def test_transform_output_is_deterministic(capsys):
    def snapshot() -> list[str]:
        code, out, _ = run_cli(
            capsys, "transform", "--builtin", "hypergeom", "--format", "json"
        )
        assert code == 0
        return [line for line in out.splitlines() if "timestamp" not in line]

    assert snapshot() == snapshot()


def test_transform_with_lower_accuracy(capsys):
    code, out, _ = run_cli(
        capsys, "transform", "--builtin", "hypergeom", "-M", "2",
        "--format", "json",
    )
    assert code == 0
    report = json.loads(out)
    assert len(report["iterations"]) == 1
    # with everything at accuracy already, no correction term survives
    assert "S" not in report["iterations"][0]
    assert report["problem"]["M"] == 2


def test_transform_with_moved_evaluation_point(capsys):
    code, out, _ = run_cli(
        capsys, "transform", "--builtin", "hypergeom", "-X", "20",
        "--format", "json",
    )
    assert code == 0
    report = json.loads(out)
    assert report["problem"]["X"] == "20"


def test_transform_text_format_mentions_iterations(capsys):
    code, out, _ = run_cli(capsys, "transform", "--builtin", "hypergeom")
    assert code == 0
    assert "iteration" in out.lower()
    assert "error" in out.lower()


def test_transform_from_file(capsys, tmp_path):
    path = write_problem(tmp_path, fixture_document())
    code, out, _ = run_cli(
        capsys, "transform", "--problem", path, "--format", "json"
    )
    assert code == 0
    assert json.loads(out)["iterations"][0]["S"] == S2_STRINGS


def test_output_flag_writes_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(
        capsys, "transform", "--builtin", "hypergeom", "--format", "json",
        "--output", str(target),
    )
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["command"] == "transform"


# -- input rejection ----------------------------------------------------

def test_duplicate_scale_entries_rejected(capsys, tmp_path):
    doc = fixture_document()
    doc["D_small"] = ["1", "1"]
    path = write_problem(tmp_path, doc)
    code, _, err = run_cli(capsys, "transform", "--problem", path)
    assert code == 2
    assert "duplicate" in err


def test_missing_file_rejected(capsys, tmp_path):
    code, _, err = run_cli(
        capsys, "transform", "--problem", str(tmp_path / "absent.json")
    )
    assert code == 2
    assert "cannot read" in err


def test_malformed_json_rejected(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    code, _, err = run_cli(capsys, "transform", "--problem", str(path))
    assert code == 2


def test_small_M_override_rejected(capsys):
    code, _, err = run_cli(
        capsys, "transform", "--builtin", "hypergeom", "-M", "1"
    )
    assert code == 2
    assert "at least 2" in err


def test_resonant_scales_rejected(capsys, tmp_path):
    # with a = 2 the gap d_1 - d_2 = 2 equals 1*a: the first elimination
    # would divide by zero
    doc = fixture_document()
    doc["a"] = "2"
    path = write_problem(tmp_path, doc)
    code, _, err = run_cli(capsys, "transform", "--problem", path)
    assert code == 3
    assert "resonance at iteration 1" in err


# -- solve --------------------------------------------------------------

def test_solve_reports_value_at_X(capsys):
    code, out, _ = run_cli(
        capsys, "solve", "--builtin", "hypergeom", "-k", "3",
        "--format", "json",
    )
    assert code == 0
    report = json.loads(out)
    assert report["k"] == 3
    assert report["Z_at_X"][2] == pytest.approx(0.09990009993337498, rel=1e-12)
    assert report["Y_at_X"][0] == pytest.approx(0.09996009933218178, rel=1e-10)
    assert report["dichotomy_ok"] is True
    assert 0 < report["eta_bound"] < 1e-6
    assert "continuation" not in report


def test_solve_continues_to_target(capsys):
    code, out, _ = run_cli(
        capsys, "solve", "--builtin", "hypergeom", "-k", "3",
        "--target", "0", "--format", "json",
    )
    assert code == 0
    report = json.loads(out)
    cont = report["continuation"]
    assert cont["target"] == "0"
    assert cont["integrator"]["method"] == "RK45"
    assert cont["Y"][0] == pytest.approx(1.87778588, abs=1e-6)
    assert cont["Y"][2] == pytest.approx(2.0, abs=1e-6)


def test_solve_refuses_to_continue_growing_solution(capsys):
    code, _, err = run_cli(
        capsys, "solve", "--builtin", "hypergeom", "-k", "1", "--target", "0"
    )
    assert code == 1
    assert "refusing" in err


def test_solve_rejects_out_of_range_k(capsys):
    code, _, err = run_cli(capsys, "solve", "--builtin", "hypergeom", "-k", "5")
    assert code == 2
    assert "k must be in 1..3" in err


def test_solve_needs_back_transform_for_target(capsys, tmp_path):
    path = write_problem(tmp_path, serialize_problem(undominated_problem()))
    code, _, err = run_cli(
        capsys, "solve", "--problem", path, "-k", "1", "--target", "1"
    )
    assert code == 2
    assert "back-transformation" in err


def test_solve_reports_failed_dichotomy(capsys, tmp_path):
    path = write_problem(tmp_path, serialize_problem(undominated_problem()))
    code, _, err = run_cli(capsys, "solve", "--problem", path, "-k", "1")
    assert code == 4
    assert "dichotomy fails for pairs (1,2)" in err


def test_solve_writes_dense_trace(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, _, _ = run_cli(
        capsys, "solve", "--builtin", "hypergeom", "-k", "3",
        "--target", "5", "--dense-csv", str(trace), "--format", "json",
    )
    assert code == 0
    lines = trace.read_text().splitlines()
    assert lines[0] == "x,y1,y2,y3"
    assert len(lines) == 202


# -- verify -------------------------------------------------------------

def test_verify_symbolic_group_passes(capsys):
    code, out, _ = run_cli(
        capsys, "verify", "--only", "symbolic", "--format", "json"
    )
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    assert all(r["group"] == "symbolic" for r in report["rows"])
    assert report["rows"]


def test_verify_fails_under_impossible_tolerance(capsys):
    code, out, _ = run_cli(
        capsys, "verify", "--only", "continuation",
        "--tolerance", "y_at_0_regression=1e-12",
    )
    assert code == 1
    assert "FAIL" in out


def test_verify_rejects_unknown_tolerance_name(capsys):
    code, _, err = run_cli(
        capsys, "verify", "--only", "symbolic", "--tolerance", "nope=1"
    )
    assert code == 2


def test_verify_rejects_malformed_tolerance(capsys):
    code, _, err = run_cli(capsys, "verify", "--tolerance", "justaname")
    assert code == 2
    assert "NAME=VALUE" in err


# -- console entry point ------------------------------------------------

def test_installed_script_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "levode.cli", "transform", "--builtin",
         "hypergeom", "--format", "json"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "transform"
