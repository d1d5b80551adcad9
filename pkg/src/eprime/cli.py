"""Command-line driver: parse -> type-check -> instantiate -> flatten -> solve -> print.

Exit status: 0 when a solution is printed (sat/optimal), 1 when the model is
proved unsatisfiable, 2 on any error (usage, unreadable file, lex/parse/type/
instance failure, or a search limit reached before an answer was proven).

Solutions are printed in parameter-file syntax — a `language ESSENCE' 1.0`
header followed by one `letting` per find, in declaration order — so the
output of one run can be fed back as the parameter file of another model.
Output is deterministic: identical inputs give byte-identical stdout.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .domains import DEFAULT_ENUM_CAP, ENUM_CAP_ENV_VAR, MatrixVal, value_text
from .errors import EssenceError
from .expand import flatten_model
from .flatcsp import FlatCSP, Output, dump_flat
from .instantiate import bind_parameters
from .parser import parse_model, parse_param_file
from .solver import SearchOutcome, SolverConfig, optimize, solve
from .typecheck import check_model, check_param_model

HEADER = "language ESSENCE' 1.0"

_EPILOG = f"""\
exit status:
  0   a solution was printed (satisfiable, or the optimum was proved)
  1   the model is unsatisfiable
  2   any error: bad usage, unreadable file, lexical/parse/type/instance
      failure, or a node/time limit reached before an answer was proven

environment:
  {ENUM_CAP_ENV_VAR}   caps every domain/quantifier enumeration (matrix index
                    spaces, unrolled bindings); default {DEFAULT_ENUM_CAP}

optimisation note:
  When a model carries both an objective and a `branching on` list, the
  branching list only orders the search: the solver still assigns every
  decision variable and proves the true optimum over all of them. Some
  solvers instead optimise only over the listed variables and may report
  a non-optimal value; a note is emitted whenever this situation arises.
"""


@dataclass
class RunConfig:
    """One driver invocation. all_solutions: None solves for the first
    solution only, 0 enumerates without a cap, N > 0 stops after N."""

    model_path: str
    param_path: str | None = None
    all_solutions: int | None = None
    check_only: bool = False
    dump_flat: bool = False
    node_limit: int | None = None
    time_limit: float | None = None


def config_of(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        model_path=args.model,
        param_path=args.param,
        all_solutions=args.all_solutions,
        check_only=args.check_only,
        dump_flat=args.dump_flat,
        node_limit=args.node_limit,
        time_limit=args.time_limit,
    )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="eprime",
        description="Model and solve finite-domain constraint problems "
        "written in the Essence' language.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("model", help="model file (.eprime)")
    p.add_argument(
        "--param",
        metavar="FILE",
        help="parameter file (.param) giving values for the model's givens",
    )
    mode = p.add_mutually_exclusive_group()
    mode.add_argument(
        "--all-solutions",
        nargs="?",
        const=0,
        default=None,
        type=int,
        metavar="N",
        help="enumerate every solution, or at most N when N is given",
    )
    mode.add_argument(
        "--check-only",
        action="store_true",
        help="stop after parsing, type checking and (with --param) parameter "
        "binding; nothing is solved or printed",
    )
    mode.add_argument(
        "--dump-flat",
        action="store_true",
        help="print the flattened constraint network instead of solving",
    )
    p.add_argument("--node-limit", type=int, metavar="N", help="abandon search after N nodes")
    p.add_argument(
        "--time-limit", type=float, metavar="SECONDS", help="abandon search after SECONDS"
    )
    return p


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def output_value_text(out: Output, assignment) -> str:
    """Render one find's value in the literal syntax parameter files use."""
    if out.kind == "bool":
        return value_text(assignment[out.vars[0]] == 1)
    if out.kind == "int":
        return value_text(assignment[out.vars[0]])
    elems = [assignment[ix] for ix in out.vars]
    if out.base == "bool":
        elems = [v == 1 for v in elems]
    return value_text(MatrixVal(tuple(out.index_doms), tuple(elems)))


def solution_lines(csp: FlatCSP, assignment) -> list[str]:
    return [f"letting {out.name} = {output_value_text(out, assignment)}" for out in csp.outputs]


def _print_outcome(csp: FlatCSP, outcome: SearchOutcome, enumerate_all: bool, stdout) -> int:
    if enumerate_all:
        n = len(outcome.solutions)
        if n:
            print(HEADER, file=stdout)
            for k, sol in enumerate(outcome.solutions, start=1):
                print(f"$ solution {k}", file=stdout)
                for line in solution_lines(csp, sol):
                    print(line, file=stdout)
        print(f"$ {n} solution" + ("" if n == 1 else "s"), file=stdout)
        return 0 if n else 1
    if outcome.status == "unsat":
        return 1
    print(HEADER, file=stdout)
    for line in solution_lines(csp, outcome.solutions[-1]):
        print(line, file=stdout)
    if outcome.status == "optimal":
        print(f"$ objective = {outcome.objective_value}", file=stdout)
    return 0


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr

    def fail(path: str, err: EssenceError) -> int:
        print(f"{path}: error: {err}", file=stderr)
        return 2

    for name in ("node_limit", "time_limit"):
        limit = getattr(cfg, name)
        if limit is not None and limit <= 0:
            print(f"eprime: error: --{name.replace('_', '-')} must be positive", file=stderr)
            return 2
    if cfg.all_solutions is not None and cfg.all_solutions < 0:
        print("eprime: error: --all-solutions takes a non-negative count", file=stderr)
        return 2

    try:
        model_text = _read(cfg.model_path)
    except OSError as e:
        print(f"eprime: error: cannot read {cfg.model_path}: {e.strerror}", file=stderr)
        return 2
    try:
        typed = check_model(parse_model(model_text))
    except EssenceError as e:
        return fail(cfg.model_path, e)

    typed_params = None
    if cfg.param_path is not None:
        try:
            param_text = _read(cfg.param_path)
        except OSError as e:
            print(f"eprime: error: cannot read {cfg.param_path}: {e.strerror}", file=stderr)
            return 2
        try:
            typed_params = check_param_model(parse_param_file(param_text))
        except EssenceError as e:
            return fail(cfg.param_path, e)

    if cfg.check_only and typed_params is None:
        return 0

    try:
        inst = bind_parameters(typed, typed_params)
    except EssenceError as e:
        return fail(cfg.model_path, e)
    if cfg.check_only:
        return 0

    try:
        csp = flatten_model(inst)
    except EssenceError as e:
        return fail(cfg.model_path, e)
    for w in csp.warnings:
        print(f"warning: {w}", file=stderr)

    if cfg.dump_flat:
        stdout.write(dump_flat(csp))
        return 0

    enumerate_all = cfg.all_solutions is not None
    solver_cfg = SolverConfig(
        all_solutions=enumerate_all,
        solution_limit=cfg.all_solutions or None,
        node_limit=cfg.node_limit,
        time_limit=cfg.time_limit,
    )
    if csp.objective is not None and enumerate_all:
        print("warning: all-solutions enumeration ignores the objective", file=stderr)
    if csp.objective is not None and not enumerate_all:
        outcome = optimize(csp, solver_cfg)
    else:
        outcome = solve(csp, solver_cfg)
    for w in outcome.warnings:
        print(f"warning: {w}", file=stderr)

    if outcome.status == "unknown":
        found = len(outcome.solutions)
        detail = f"; {found} solution(s) found so far" if found else ""
        if outcome.objective_value is not None:
            detail = f"; best objective found so far: {outcome.objective_value}"
        print(
            f"eprime: error: search limit reached before an answer was proven{detail}",
            file=stderr,
        )
        return 2
    return _print_outcome(csp, outcome, enumerate_all, stdout)


def main(argv=None) -> int:
    return run(config_of(build_parser().parse_args(argv)))


if __name__ == "__main__":
    sys.exit(main())
