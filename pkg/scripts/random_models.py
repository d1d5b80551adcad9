"""Random Essence' model generation and a brute-force oracle.

Shared by the acceptance suite and the `random_equivalence.py` experiment.
Models are produced as source text so every stage of the pipeline runs:
lexing, parsing, type checking, instantiation, flattening and search.

The oracle enumerates every assignment of the decision variables and
evaluates the original constraint ASTs with the ground evaluator, which
implements the relational undefinedness rule (an undefined subexpression
makes its nearest boolean ancestor false) independently of the flattener.

Generated expressions keep integers tiny (leaves in -3..3, no nested power
operators) so 64-bit overflow is unreachable and brute force stays fast.
"""

from __future__ import annotations

import itertools
import random

from eprime.ast_nodes import Objective, SuchThat
from eprime.cli import output_value_text
from eprime.domains import domain_enumerate, value_text
from eprime.expand import flatten_model
from eprime.instantiate import bind_parameters, eval_ground
from eprime.parser import parse_model
from eprime.solver import SolverConfig, optimize, solve
from eprime.typecheck import check_model


# --------------------------------------------------------------------------
# generation

_CMPS = ["=", "!=", "<", "<=", ">", ">="]


class ModelGen:
    """Draws random models: scalar/matrix finds plus boolean constraints of
    bounded depth over +, -, *, /, %, **, indexing, and logic connectives."""

    def __init__(self, rng: random.Random, with_objective: bool = False):
        self.rng = rng
        self.with_objective = with_objective

    def model(self) -> str:
        rng = self.rng
        self.int_vars = []
        self.bool_vars = []
        self.matrices = []  # (name, first_index, length, base_lo, base_hi)
        finds = []
        cells = 0
        want = rng.randint(1, 4)
        if self.with_objective:
            lo = rng.randint(-3, 0)
            hi = lo + rng.randint(1, 3)
            finds.append(f"find obj0 : int({lo}..{hi})")
            self.int_vars.append("obj0")
            cells = 1
        while cells < want:
            kind = rng.random()
            n = cells
            if kind < 0.45:
                lo = rng.randint(-3, 2)
                hi = lo + rng.randint(0, 3)
                finds.append(f"find i{n} : int({lo}..{hi})")
                self.int_vars.append(f"i{n}")
                cells += 1
            elif kind < 0.65:
                finds.append(f"find b{n} : bool")
                self.bool_vars.append(f"b{n}")
                cells += 1
            elif cells + 2 <= want:
                first = rng.choice([0, 1])
                lo = rng.randint(-2, 1)
                hi = lo + rng.randint(0, 2)
                finds.append(
                    f"find m{n} : matrix indexed by "
                    f"[int({first}..{first + 1})] of int({lo}..{hi})"
                )
                self.matrices.append((f"m{n}", first, 2, lo, hi))
                cells += 2
            else:
                continue
        constraints = [self.bool_expr(4, ()) for _ in range(rng.randint(1, 3))]
        lines = ["language ESSENCE' 1.0", *finds, "such that " + ",\n          ".join(constraints)]
        if self.with_objective:
            lines.append(f"{self.rng.choice(['minimising', 'maximising'])} {self.linear_objective()}")
        return "\n".join(lines) + "\n"

    def linear_objective(self) -> str:
        rng = self.rng
        terms = []
        for name in self.int_vars:
            terms.append(f"{rng.randint(-2, 3)}*{name}")
        for name, first, length, _, _ in self.matrices:
            ix = rng.randint(first, first + length - 1)
            terms.append(f"{rng.randint(-2, 3)}*{name}[{ix}]")
        if not terms:
            terms = ["0"]
        return " + ".join(terms)

    def int_leaf(self, scope) -> str:
        rng = self.rng
        pool = [str(rng.randint(-3, 3))]
        pool.extend(self.int_vars)
        pool.extend(scope)
        return rng.choice(pool)

    def index_expr(self, scope) -> str:
        """Matrix indices cannot mention decision variables: draw from
        literals and quantifier variables only (often out of bounds, which
        exercises the undefinedness rule)."""
        rng = self.rng
        pool = [str(rng.randint(-1, 4))]
        pool.extend(scope)
        choice = rng.choice(pool)
        if rng.random() < 0.25:
            return f"({choice} + {rng.randint(-1, 2)})"
        return choice

    def int_expr(self, depth: int, scope) -> str:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.25:
            return self.int_leaf(scope)
        roll = rng.random()
        if roll < 0.12 and self.matrices:
            name, *_ = rng.choice(self.matrices)
            return f"{name}[{self.index_expr(scope)}]"
        if roll < 0.2:
            return f"-({self.int_expr(depth - 1, scope)})"
        if roll < 0.26:
            return f"|{self.int_expr(depth - 1, scope)}|"
        if roll < 0.34:
            return f"toInt({self.bool_expr(depth - 1, scope)})"
        if roll < 0.42:
            # power: flat base, tiny exponent, so no overflow is reachable
            base = self.int_leaf(scope)
            exp = rng.choice([str(rng.randint(0, 2)), self.int_leaf(scope)])
            return f"({base}) ** ({exp})"
        op = rng.choice(["+", "-", "*", "/", "%"])
        return f"({self.int_expr(depth - 1, scope)} {op} {self.int_expr(depth - 1, scope)})"

    def bool_expr(self, depth: int, scope) -> str:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.2:
            if self.bool_vars and rng.random() < 0.6:
                return rng.choice(self.bool_vars)
            return rng.choice(["true", "false"])
        roll = rng.random()
        if roll < 0.45:
            op = rng.choice(_CMPS)
            return f"({self.int_expr(depth - 1, scope)} {op} {self.int_expr(depth - 1, scope)})"
        if roll < 0.55:
            return f"!({self.bool_expr(depth - 1, scope)})"
        if roll < 0.78:
            op = rng.choice(["/\\", "\\/", "->", "<->"])
            return f"({self.bool_expr(depth - 1, scope)} {op} {self.bool_expr(depth - 1, scope)})"
        if roll < 0.86:
            v = f"q{len(scope)}"
            lo = rng.randint(0, 1)
            quant = rng.choice(["forAll", "exists"])
            return f"({quant} {v} : int({lo}..{lo + 1}) . {self.bool_expr(depth - 2, scope + (v,))})"
        if roll < 0.93:
            v = f"q{len(scope)}"
            lo = rng.randint(0, 1)
            body = self.int_expr(depth - 2, scope + (v,))
            op = rng.choice(_CMPS)
            return f"(sum([ {body} | {v} : int({lo}..{lo + 1}) ]) {op} {self.int_expr(depth - 2, scope)})"
        members = ", ".join(str(rng.randint(-3, 3)) for _ in range(rng.randint(1, 3)))
        return f"({self.int_expr(depth - 1, scope)} in toSet([{members}]))"


def random_model(rng: random.Random, with_objective: bool = False) -> str:
    return ModelGen(rng, with_objective).model()


# --------------------------------------------------------------------------
# global-constraint models (each built around one global)


def random_global_model(rng: random.Random, which: str) -> str:
    n = rng.randint(2, 4)
    lo = rng.randint(-1, 1)
    hi = lo + rng.randint(1, 3)
    finds = [f"find x{i} : int({lo}..{hi})" for i in range(n)]
    xs = "[" + ", ".join(f"x{i}" for i in range(n)) + "]"
    vals = lambda k: [rng.randint(lo - 1, hi + 1) for _ in range(k)]
    if which == "gcc":
        k = rng.randint(1, 2)
        vs = vals(k)
        if rng.random() < 0.5:
            counts = "[" + ", ".join(str(rng.randint(0, n)) for _ in range(k)) + "]"
        else:
            finds.append(f"find c : matrix indexed by [int(1..{k})] of int(0..{n})")
            counts = "c"
        body = f"gcc({xs}, {vs}, {counts})"
    elif which in ("atleast", "atmost"):
        k = rng.randint(1, 2)
        counts = [rng.randint(0, n) for _ in range(k)]
        body = f"{which}({xs}, {counts}, {vals(k)})"
    elif which == "alldifferent_except":
        body = f"alldifferent_except({xs}, {rng.randint(lo - 1, hi + 1)})"
    elif which == "table":
        rows = [tuple(vals(n)) for _ in range(rng.randint(1, 5))]
        rows_text = ", ".join("[" + ", ".join(map(str, r)) + "]" for r in rows)
        body = f"table({xs}, [{rows_text}])"
    else:  # lex
        half = n // 2
        left = "[" + ", ".join(f"x{i}" for i in range(half)) + "]"
        right = "[" + ", ".join(f"x{i}" for i in range(half, n)) + "]"
        op = rng.choice(["<lex", "<=lex"])
        body = f"{left} {op} {right}"
    if rng.random() < 0.3:
        body = f"!({body})"
    return "language ESSENCE' 1.0\n" + "\n".join(finds) + f"\nsuch that {body}\n"


# --------------------------------------------------------------------------
# brute-force oracle and comparison

SOLVE_CFG = SolverConfig(all_solutions=True)


def oracle_solutions(inst) -> list[tuple[str, ...]]:
    names = list(inst.find_domains)
    spaces = [list(domain_enumerate(d)) for d in inst.find_domains.values()]
    constraints = [
        c for st in inst.typed.model.of_kind(SuchThat) for c in st.constraints
    ]
    found = []
    for combo in itertools.product(*spaces):
        env = dict(inst.env)
        env.update(zip(names, combo))
        if all(eval_ground(c, env) is True for c in constraints):
            found.append((combo, env))
    return found


def solution_key(csp, assignment) -> tuple[str, ...]:
    return tuple(output_value_text(out, assignment) for out in csp.outputs)


def compare_model(text: str):
    """Flatten+solve vs brute force. Returns (agree, solver_set, oracle_set)."""
    inst = bind_parameters(check_model(parse_model(text)))
    csp = flatten_model(inst)
    got = sorted(solution_key(csp, sol) for sol in solve(csp, SOLVE_CFG).solutions)
    want = sorted(
        tuple(value_text(v) for v in combo) for combo, _ in oracle_solutions(inst)
    )
    return got == want, got, want


def compare_objective(text: str):
    """optimize() vs brute-force best. Returns (agree, solver_best, oracle_best);
    best is None when unsatisfiable."""
    inst = bind_parameters(check_model(parse_model(text)))
    (objective,) = inst.typed.model.of_kind(Objective)
    csp = flatten_model(inst)
    if csp.objective is None:  # proven unsatisfiable during flattening
        got = None
        assert solve(csp).status == "unsat"
    else:
        out = optimize(csp)
        got = out.objective_value if out.status == "optimal" else None
    values = [
        eval_ground(objective.expr, env) for _, env in oracle_solutions(inst)
    ]
    if not values:
        want = None
    else:
        want = min(values) if objective.sense == "minimising" else max(values)
    return got == want, got, want
