"""Command line: solve an interpolation problem and print the interpolant."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .frontend import ParseError, parse_problem, problem_from_script
from .interpolation import ProjectionMode, interpolate
from .logic import LogicError
from .printer import formula_str, model_str
from .proof import check_proof, serialize
from .sat import ResourceLimit, Sat, SolverConfig, solve
from .verification import OracleConfig, check_interpolant

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3


@dataclass
class RunConfig:
    input_path: str
    mode: ProjectionMode = ProjectionMode.PUDLAK
    check: bool = False
    proof_out: str | None = None
    oracle_bound: int = 8
    extended_branches: bool = False
    seed: int = 0
    budget: int = 200_000
    print_model: bool = False

    def __post_init__(self):
        if self.budget < 1 or self.oracle_bound < 1:
            raise ValueError("budget and oracle bound must be at least 1")


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mixinterp", description="Craig interpolants for QF_UFLIA / QF_UFLRA problems.")
    p.add_argument("input", help="SMT-LIB file with assertions named A and B")
    p.add_argument("--mode", choices=[m.value for m in ProjectionMode], default="pudlak")
    p.add_argument("--check", action="store_true", help="verify the Craig conditions and the proof")
    p.add_argument("--proof-out", metavar="PATH", help="write the resolution proof here")
    p.add_argument("--oracle-bound", type=_positive, default=8, metavar="N")
    p.add_argument("--extended-branches", action="store_true", help="branch on differences of Int terms")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=_positive, default=200_000, metavar="N", help="decisions plus conflicts")
    p.add_argument("--model", action="store_true", help="print a model when satisfiable")
    return p


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        with open(cfg.input_path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"error: cannot read {cfg.input_path}: {e.strerror}", file=err)
        return EXIT_USAGE
    try:
        script = parse_problem(text)
        problem = problem_from_script(script)
    except ParseError as e:
        print(f"{cfg.input_path}:{e.line}:{e.col}: error: {e.msg}", file=err)
        return EXIT_USAGE
    except LogicError as e:
        print(f"{cfg.input_path}: error: {e}", file=err)
        return EXIT_USAGE
    solver_cfg = SolverConfig(budget=cfg.budget, seed=cfg.seed, extended_branches=cfg.extended_branches)
    try:
        result = solve(problem, solver_cfg)
    except ResourceLimit as e:
        print("unknown", file=out)
        print(f"resource limit: {e}", file=err)
        return EXIT_LIMIT
    if isinstance(result, Sat):
        print("sat", file=out)
        if cfg.print_model:
            out.write(model_str(result.model))
        return EXIT_OK
    if cfg.proof_out:
        with open(cfg.proof_out, "w", encoding="utf-8") as fh:
            fh.write(serialize(result.root))
    interp = interpolate(problem, result.root, cfg.mode)
    print("unsat", file=out)
    print(formula_str(interp.interpolant), file=out)
    if not cfg.check:
        return EXIT_OK
    verdict = check_proof(result.root, problem)
    print(f"check proof: {'pass' if verdict == 'ok' else 'fail ' + verdict}", file=out)
    report = check_interpolant(
        problem.a,
        problem.b,
        interp.interpolant,
        problem.partition,
        problem.sort,
        oracle=OracleConfig(bound=cfg.oracle_bound),
        budget=cfg.budget,
        seed=cfg.seed,
    )
    for line in report.lines():
        print(line, file=out)
    if verdict != "ok" or (not report.passed and not report.unknown):
        return EXIT_CHECK
    if report.unknown:
        return EXIT_LIMIT
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        input_path=args.input,
        mode=ProjectionMode(args.mode),
        check=args.check,
        proof_out=args.proof_out,
        oracle_bound=args.oracle_bound,
        extended_branches=args.extended_branches,
        seed=args.seed,
        budget=args.budget,
        print_model=args.model,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
