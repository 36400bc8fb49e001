"""Command-line interface: transform, solve, verify.

Exit codes: 0 success; 1 verification failure, refused continuation, or a
numeric bound failure; 2 invalid input (schema, invariant, file, flags);
3 resonance in the small diagonal block; 4 dichotomy failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import datetime, timezone
from fractions import Fraction

from .error_ledger import (
    ContractionFailure,
    DivergentIntegral,
    eta_bound,
    matrix_norm_bound,
    total_error_bound,
)
from .fixtures import BUILTINS
from .levinson_solver import (
    MissingBackTransform,
    asymptotic_value,
    back_transform,
    check_dichotomy,
    derive_original_system,
    exponent_data,
    is_safely_continuable,
)
from .ode_connector import (
    METHOD_INFO,
    PoleInInterval,
    StepSizeUnderflow,
    integrate,
    linear_system,
)
from .symexpr import SymMatrix
from .system_model import (
    INVERSE_X,
    InvariantViolation,
    ModeError,
    ProblemSpec,
    SchemaError,
    load_problem,
    validate,
    validate_resonance,
)
from .transform_engine import FinalState, run
from .verify import GROUPS, run_checks

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_RESONANCE = 3
EXIT_DICHOTOMY = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levode",
        description=(
            "Reduce a singular linear ODE system by repeated transformations, "
            "evaluate its asymptotic solutions with error bounds, and continue "
            "them numerically."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    transform = sub.add_parser(
        "transform", help="run the reduction and report the transcript"
    )
    _add_common(transform, need_problem=True)

    solve = sub.add_parser(
        "solve", help="evaluate one asymptotic solution, optionally continue it"
    )
    _add_common(solve, need_problem=True)
    solve.add_argument("-k", type=int, required=True, help="solution index (1-based)")
    solve.add_argument("--target", help="continuation target point (rational)")
    solve.add_argument("--rtol", type=float, default=1e-10)
    solve.add_argument("--atol", type=float, default=1e-12)
    solve.add_argument("--dense-csv", metavar="PATH", help="write dense output CSV")

    verify = sub.add_parser("verify", help="run the built-in check suite")
    verify.add_argument("--only", choices=GROUPS, help="run a single check group")
    verify.add_argument(
        "--tolerance",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="override a check tolerance (repeatable)",
    )
    verify.add_argument("--format", choices=("text", "json"), default="text")
    verify.add_argument("--output", metavar="PATH")
    return parser


def _add_common(p: argparse.ArgumentParser, need_problem: bool) -> None:
    g = p.add_mutually_exclusive_group(required=need_problem)
    g.add_argument("--builtin", choices=sorted(BUILTINS), help="built-in problem name")
    g.add_argument("--problem", metavar="PATH", help="problem description JSON file")
    p.add_argument(
        "-M",
        dest="M_override",
        type=int,
        help="override the accuracy stage count (rungs beyond it fold into E1)",
    )
    p.add_argument("-X", dest="X_override", help="override the evaluation point")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", metavar="PATH")


def _load_spec(args) -> ProblemSpec:
    if args.builtin:
        spec = BUILTINS[args.builtin]()
    else:
        with open(args.problem) as fh:
            spec = load_problem(json.load(fh))
    if args.M_override is not None:
        if args.M_override < 2:
            raise InvariantViolation("M override must be at least 2")
        folded = spec.E1
        kept = []
        for j, mat in spec.ladder:
            if j <= args.M_override - 1:
                kept.append((j, mat))
            else:
                folded = folded + mat
        spec = validate(
            dataclasses.replace(
                spec, M=args.M_override, ladder=tuple(kept), E1=folded
            )
        )
    if args.X_override is not None:
        spec = validate(spec.with_X(Fraction(args.X_override)))
    return spec


def _check_resonance(spec: ProblemSpec) -> list[str]:
    if spec.mode != INVERSE_X:
        return []
    report = validate_resonance(spec)
    return [
        f"resonance at iteration {h.m}: d_{h.j} - d_{h.i} = {h.m * spec.a}"
        for h in report.hits
    ]


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _problem_summary(spec: ProblemSpec, args) -> dict:
    return {
        "source": args.builtin or args.problem,
        "n": spec.n,
        "N": spec.N,
        "M": spec.M,
        "a": str(spec.a),
        "mode": spec.mode,
        "X": str(spec.X),
    }


def _matrix_json(mat: SymMatrix) -> list[list[str]]:
    return mat.to_strings()


def _transform_report(spec: ProblemSpec, fs: FinalState, args) -> dict:
    iterations = []
    for rec in fs.iterations:
        entry = {
            "m": rec.m,
            "P_scaled": _matrix_json(rec.psplit.scaled),
            "P_plain": _matrix_json(rec.psplit.plain),
            "lambda": [f.to_string() for f in rec.lambda_next],
            "nu": {label: nu for label, nu in rec.nu_choices},
            "bucket_orders": {str(k): str(lo) for k, lo in rec.bucket_orders},
        }
        if not rec.s_next.is_zero:
            entry["S"] = _matrix_json(rec.s_next)
        iterations.append(entry)
    ledger = fs.ledger
    report = {
        "schema": SCHEMA_VERSION,
        "timestamp": _timestamp(),
        "command": "transform",
        "problem": _problem_summary(spec, args),
        "lambda1": [f.to_string() for f in spec.lambda1_diagonal()],
        "S1": _matrix_json(fs.dominant_terms[0]),
        "iterations": iterations,
        "ledger": {
            "entries": [
                {
                    "stage": e.stage,
                    "via_iteration": e.via_iteration,
                    "matrix": _matrix_json(e.matrix),
                    "norm_at_X": float(matrix_norm_bound(e.matrix, spec.X)),
                }
                for e in ledger.entries
            ],
            "P_norms": [
                float(matrix_norm_bound(P, spec.X)) for P in ledger.p_matrices
            ],
        },
        "residual_leading_order": str(fs.residual.max_leading_order()),
        "total_error_bound": total_error_bound(ledger),
    }
    return report


def _render_matrix(rows: list[list[str]], indent: str = "  ") -> str:
    return "\n".join(indent + "[" + ", ".join(row) + "]" for row in rows)


def _transform_text(report: dict) -> str:
    lines = [
        f"problem: {report['problem']['source']}  "
        f"(n={report['problem']['n']}, M={report['problem']['M']}, "
        f"a={report['problem']['a']}, mode={report['problem']['mode']}, "
        f"X={report['problem']['X']})",
        "Lambda_1 diagonal:",
    ]
    lines += [f"  {s}" for s in report["lambda1"]]
    lines.append("S_1:")
    lines.append(_render_matrix(report["S1"]))
    for it in report["iterations"]:
        lines.append(f"iteration m={it['m']}:")
        lines.append("  P (scaled part):")
        lines.append(_render_matrix(it["P_scaled"], "    "))
        lines.append("  P (plain part):")
        lines.append(_render_matrix(it["P_plain"], "    "))
        if "S" in it:
            lines.append(f"  S_{it['m'] + 1}:")
            lines.append(_render_matrix(it["S"], "    "))
        else:
            lines.append(f"  S_{it['m'] + 1}: 0")
        lines.append("  new diagonal:")
        lines += [f"    {s}" for s in it["lambda"]]
        lines.append(f"  expansion depths: {it['nu']}")
    lines.append("error ledger:")
    for e in report["ledger"]["entries"]:
        lines.append(
            f"  stage {e['stage']} (via iteration {e['via_iteration']}): "
            f"norm at X = {e['norm_at_X']:.6e}"
        )
    lines.append(f"residual leading order: {report['residual_leading_order']}")
    lines.append(f"total error bound: {report['total_error_bound']:.8e}")
    return "\n".join(lines)


def _cmd_transform(args) -> int:
    spec = _load_spec(args)
    hits = _check_resonance(spec)
    if hits:
        print("\n".join(hits), file=sys.stderr)
        return EXIT_RESONANCE
    fs = run(spec)
    report = _transform_report(spec, fs, args)
    if args.format == "json":
        _emit(args, json.dumps(report, sort_keys=True, indent=2))
    else:
        _emit(args, _transform_text(report))
    return EXIT_OK


def _cmd_solve(args) -> int:
    spec = _load_spec(args)
    hits = _check_resonance(spec)
    if hits:
        print("\n".join(hits), file=sys.stderr)
        return EXIT_RESONANCE
    if not 1 <= args.k <= spec.n:
        raise InvariantViolation(f"k must be in 1..{spec.n}, got {args.k}")
    if args.target is not None and spec.back_transform is None:
        raise MissingBackTransform(
            "continuation needs the original system, so the problem must "
            "define a back-transformation matrix T(x)"
        )
    fs = run(spec)
    dichotomy = check_dichotomy(spec, fs.diag)
    if not dichotomy.ok_for(args.k):
        bad = [
            f"({p.j},{p.k})" for p in dichotomy.pairs
            if (p.j == args.k or p.k == args.k) and not p.ok
        ]
        print(
            f"dichotomy fails for pairs {', '.join(bad)}; the deviation bound "
            "for this solution is not certified",
            file=sys.stderr,
        )
        return EXIT_DICHOTOMY

    data = exponent_data(args.k, fs.diag, spec)
    vec, C = asymptotic_value(args.k, fs.diag, spec, spec.X)
    eta = eta_bound(fs.residual, spec)
    tail = float(data.tail_budget)
    if tail:
        import math

        eta = eta + math.expm1(tail) * (1.0 + eta)
    total = total_error_bound(fs.ledger)

    report = {
        "schema": SCHEMA_VERSION,
        "timestamp": _timestamp(),
        "command": "solve",
        "problem": _problem_summary(spec, args),
        "k": args.k,
        "C": C,
        "Z_at_X": list(vec),
        "eta_bound": eta,
        "total_error_bound": total,
        "exponent": {
            "log_coefficient": str(data.log_coefficient),
            "terms": [[str(c), e] for c, e in data.laurent_terms],
            "tail_budget": tail,
        },
        "dichotomy_ok": dichotomy.ok,
    }
    if spec.back_transform is not None:
        report["Y_at_X"] = list(back_transform(vec, fs.history, spec, spec.X))

    if args.target is not None:
        if not is_safely_continuable(data):
            growing = [
                f"{c}*x^{e + 1}/{e + 1}"
                for c, e in data.laurent_terms
                if e >= 0 and c > 0
            ]
            print(
                f"solution k={args.k} grows exponentially toward infinity "
                f"(exponent term {', '.join(growing)}); continuing it backward "
                "from X would amplify the uncertified dominant part, refusing",
                file=sys.stderr,
            )
            return EXIT_FAILURE
        target = Fraction(args.target)
        A = derive_original_system(spec)
        system = linear_system(A, min(target, spec.X), max(target, spec.X))
        y_target = integrate(
            system,
            report["Y_at_X"],
            spec.X,
            target,
            rtol=args.rtol,
            atol=args.atol,
            dense_path=args.dense_csv,
        )
        report["continuation"] = {
            "target": str(target),
            "Y": list(y_target),
            "rtol": args.rtol,
            "atol": args.atol,
            "integrator": METHOD_INFO,
        }

    if args.format == "json":
        _emit(args, json.dumps(report, sort_keys=True, indent=2))
    else:
        _emit(args, _solve_text(report))
    return EXIT_OK


def _solve_text(report: dict) -> str:
    lines = [
        f"problem: {report['problem']['source']}  (X={report['problem']['X']})",
        f"solution k={report['k']}",
        f"normalization C = {report['C']!r}",
        f"Z(X) = {report['Z_at_X']!r}",
        f"eta bound = {report['eta_bound']:.6e}",
        f"total error bound = {report['total_error_bound']:.6e}",
    ]
    exp = report["exponent"]
    lines.append(
        f"exponent: log coefficient {exp['log_coefficient']}, "
        f"power terms {exp['terms']!r}, tail budget {exp['tail_budget']:.3e}"
    )
    if "Y_at_X" in report:
        lines.append(f"Y(X) = {report['Y_at_X']!r}")
    if "continuation" in report:
        cont = report["continuation"]
        lines.append(
            f"Y({cont['target']}) = {cont['Y']!r}  "
            f"[{cont['integrator']['method']}, rtol={cont['rtol']:g}]"
        )
    return "\n".join(lines)


def _parse_tolerances(pairs: list[str]) -> dict[str, float]:
    out = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise InvariantViolation(
                f"tolerance override must be NAME=VALUE, got {pair!r}"
            )
        try:
            out[name] = float(value)
        except ValueError:
            raise InvariantViolation(
                f"tolerance value for {name!r} is not a number: {value!r}"
            ) from None
    return out


def _cmd_verify(args) -> int:
    overrides = _parse_tolerances(args.tolerance)
    try:
        rows = run_checks(only=args.only, tolerance_overrides=overrides)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    all_pass = all(r.passed for r in rows)
    if args.format == "json":
        report = {
            "schema": SCHEMA_VERSION,
            "timestamp": _timestamp(),
            "command": "verify",
            "rows": [dataclasses.asdict(r) for r in rows],
            "passed": all_pass,
        }
        _emit(args, json.dumps(report, sort_keys=True, indent=2))
    else:
        lines = []
        for r in rows:
            mark = "PASS" if r.passed else "FAIL"
            tol = "exact" if r.tolerance is None else f"{r.tolerance:g}"
            lines.append(f"{mark}  {r.name:<28} [{r.group}]  tolerance={tol}")
            lines.append(f"      computed:  {r.computed}")
            lines.append(f"      reference: {r.reference}")
        lines.append(
            f"{sum(r.passed for r in rows)}/{len(rows)} checks passed"
        )
        _emit(args, "\n".join(lines))
    return EXIT_OK if all_pass else EXIT_FAILURE


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "transform":
            return _cmd_transform(args)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_verify(args)
    except (SchemaError, InvariantViolation, ModeError, MissingBackTransform) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read problem: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (
        ContractionFailure,
        DivergentIntegral,
        PoleInInterval,
        StepSizeUnderflow,
    ) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
