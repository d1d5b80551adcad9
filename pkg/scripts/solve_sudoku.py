#!/usr/bin/env python3
"""Solve a Sudoku instance with the full pipeline and print the grid.

    python3 scripts/solve_sudoku.py
    python3 scripts/solve_sudoku.py --param models/sudoku-wikipedia.param --all-solutions
"""

import argparse
import sys
import time
from pathlib import Path

from eprime.expand import flatten_model
from eprime.instantiate import bind_parameters
from eprime.parser import parse_model, parse_param_file
from eprime.solver import SolverConfig, solve
from eprime.typecheck import check_model, check_param_model

ROOT = Path(__file__).resolve().parent.parent


def grid_text(values) -> str:
    lines = []
    for r in range(9):
        row = values[9 * r : 9 * (r + 1)]
        cells = " ".join(str(v) for v in row)
        lines.append(cells[:5] + " | " + cells[6:11] + " | " + cells[12:])
        if r in (2, 5):
            lines.append("------+-------+------")
    return "\n".join(lines)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default=str(ROOT / "models" / "sudoku.eprime"))
    ap.add_argument("--param", default=str(ROOT / "models" / "sudoku-wikipedia.param"))
    ap.add_argument("--all-solutions", action="store_true", help="count every completion")
    args = ap.parse_args(argv)

    typed = check_model(parse_model(Path(args.model).read_text()))
    params = check_param_model(parse_param_file(Path(args.param).read_text()))
    t0 = time.perf_counter()
    csp = flatten_model(bind_parameters(typed, params))
    t1 = time.perf_counter()
    outcome = solve(csp, SolverConfig(all_solutions=args.all_solutions))
    t2 = time.perf_counter()

    print(f"flatten: {len(csp.variables)} variables, {len(csp.constraints)} constraints, {t1 - t0:.3f}s")
    print(f"search:  status={outcome.status} nodes={outcome.nodes} backtracks={outcome.backtracks} {t2 - t1:.3f}s")
    if not outcome.solutions:
        return 1
    print(f"solutions: {len(outcome.solutions)}")
    print(grid_text(outcome.solutions[0]))
    return 0


if __name__ == "__main__":
    sys.exit(main())
