"""Flat constraint-satisfaction problems.

A FlatCSP is the solver's input: finitely-domained integer/boolean variables
(booleans are 0/1 with a rendering flag) plus a conjunction of constraints
drawn from a fixed catalogue. Everything symbolic — quantifiers,
comprehensions, matrices, nested arithmetic — has been expanded away by the
time a FlatCSP exists; constraints reference variables by index only.

DivCon/ModCon/PowCon encode the *totalized* operations: the result is 0
whenever the underlying partial operation is undefined (division or modulo
by zero, negative exponent, 0**0). The undefinedness guards that make those
cases unreachable in well-defined positions are separate constraints,
produced during expansion.

dump_flat renders a stable line-oriented text form used by --dump-flat and
golden tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# A boolean literal: (variable index, True for the positive phase).
Lit = tuple[int, bool]


@dataclass
class FlatVar:
    index: int
    name: str
    values: frozenset[int]
    is_bool: bool = False


# --------------------------------------------------------------------------
# Constraint catalogue. Linear terms are tuples of (coefficient, var index);
# comparison ops are normalized to "=", "!=", "<=".


@dataclass(frozen=True)
class LinearCon:
    terms: tuple[tuple[int, int], ...]
    op: str
    rhs: int


@dataclass(frozen=True)
class ReifLinear:
    """lit <-> (sum terms op rhs)."""

    lit: Lit
    terms: tuple[tuple[int, int], ...]
    op: str
    rhs: int


@dataclass(frozen=True)
class ReifInSet:
    """lit <-> var's value is in values."""

    lit: Lit
    var: int
    values: frozenset[int]


@dataclass(frozen=True)
class ProductCon:
    """x * y = z."""

    x: int
    y: int
    z: int


@dataclass(frozen=True)
class DivCon:
    """z = x / y rounding down, 0 when y = 0."""

    x: int
    y: int
    z: int


@dataclass(frozen=True)
class ModCon:
    """z = x % y with the sign of y, 0 when y = 0."""

    x: int
    y: int
    z: int


@dataclass(frozen=True)
class PowCon:
    """z = x ** y, 0 when y < 0 or x = y = 0."""

    x: int
    y: int
    z: int


@dataclass(frozen=True)
class AbsCon:
    """z = |x|."""

    x: int
    z: int


@dataclass(frozen=True)
class MinCon:
    """z = min(xs)."""

    xs: tuple[int, ...]
    z: int


@dataclass(frozen=True)
class MaxCon:
    """z = max(xs)."""

    xs: tuple[int, ...]
    z: int


@dataclass(frozen=True)
class AllDiffCon:
    xs: tuple[int, ...]


@dataclass(frozen=True)
class AllDiffExceptCon:
    """Pairwise difference ignoring occurrences of value."""

    xs: tuple[int, ...]
    value: int


@dataclass(frozen=True)
class GccCon:
    """Occurrences of vals[i] among xs equals the value of counts[i]."""

    xs: tuple[int, ...]
    vals: tuple[int, ...]
    counts: tuple[int, ...]


@dataclass(frozen=True)
class AtleastCon:
    """Occurrences of vals[i] among xs is at least counts[i]."""

    xs: tuple[int, ...]
    counts: tuple[int, ...]
    vals: tuple[int, ...]


@dataclass(frozen=True)
class AtmostCon:
    """Occurrences of vals[i] among xs is at most counts[i]."""

    xs: tuple[int, ...]
    counts: tuple[int, ...]
    vals: tuple[int, ...]


@dataclass(frozen=True)
class TableCon:
    scope: tuple[int, ...]
    tuples: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class LexCon:
    """xs <=lex ys (strict: <lex); sequences may have different lengths."""

    xs: tuple[int, ...]
    ys: tuple[int, ...]
    strict: bool


@dataclass(frozen=True)
class ClauseCon:
    lits: tuple[Lit, ...]


FlatConstraint = (
    LinearCon
    | ReifLinear
    | ReifInSet
    | ProductCon
    | DivCon
    | ModCon
    | PowCon
    | AbsCon
    | MinCon
    | MaxCon
    | AllDiffCon
    | AllDiffExceptCon
    | GccCon
    | AtleastCon
    | AtmostCon
    | TableCon
    | LexCon
    | ClauseCon
)


# --------------------------------------------------------------------------
# Solution layout: how find declarations map onto flat variables.


@dataclass
class Output:
    """One find declaration: kind is 'int', 'bool', or 'matrix'. For a
    matrix, vars lists the element variables in row-major order and
    index_doms holds the printable index domain values."""

    name: str
    kind: str
    vars: tuple[int, ...]
    index_doms: tuple = ()
    base: str = "int"


@dataclass
class FlatCSP:
    variables: list[FlatVar] = field(default_factory=list)
    constraints: list[FlatConstraint] = field(default_factory=list)
    objective: tuple[str, int] | None = None  # ('minimising'|'maximising', var)
    branching: list[int] | None = None
    heuristic: str | None = None
    outputs: list[Output] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    trivially_unsat: bool = False

    def new_var(self, name: str, values, is_bool: bool = False) -> int:
        v = FlatVar(len(self.variables), name, frozenset(values), is_bool)
        self.variables.append(v)
        return v.index

    def post(self, con: FlatConstraint):
        for ix in constraint_vars(con):
            assert 0 <= ix < len(self.variables), f"undeclared variable {ix}"
        self.constraints.append(con)


def constraint_vars(con: FlatConstraint) -> list[int]:
    """Every variable index a constraint mentions."""
    if isinstance(con, LinearCon):
        return [v for _, v in con.terms]
    if isinstance(con, ReifLinear):
        return [con.lit[0]] + [v for _, v in con.terms]
    if isinstance(con, ReifInSet):
        return [con.lit[0], con.var]
    if isinstance(con, (ProductCon, DivCon, ModCon, PowCon)):
        return [con.x, con.y, con.z]
    if isinstance(con, AbsCon):
        return [con.x, con.z]
    if isinstance(con, (MinCon, MaxCon)):
        return list(con.xs) + [con.z]
    if isinstance(con, (AllDiffCon, AllDiffExceptCon)):
        return list(con.xs)
    if isinstance(con, GccCon):
        return list(con.xs) + list(con.counts)
    if isinstance(con, (AtleastCon, AtmostCon)):
        return list(con.xs)
    if isinstance(con, TableCon):
        return list(con.scope)
    if isinstance(con, LexCon):
        return list(con.xs) + list(con.ys)
    if isinstance(con, ClauseCon):
        return [v for v, _ in con.lits]
    raise AssertionError(f"unknown constraint {con!r}")


# --------------------------------------------------------------------------
# Text dump


def values_text(values) -> str:
    """Sorted values as merged ranges: '0..3 7 9..12'."""
    vs = sorted(values)
    if not vs:
        return "(empty)"
    parts = []
    lo = hi = vs[0]
    for v in vs[1:]:
        if v == hi + 1:
            hi = v
            continue
        parts.append(f"{lo}..{hi}" if lo != hi else f"{lo}")
        lo = hi = v
    parts.append(f"{lo}..{hi}" if lo != hi else f"{lo}")
    return " ".join(parts)


def _lit_text(lit: Lit) -> str:
    return ("+" if lit[1] else "-") + f"v{lit[0]}"


def _terms_text(terms) -> str:
    if not terms:
        return "0"
    return " + ".join(f"{c}*v{v}" for c, v in terms)


def _vars_text(xs) -> str:
    return " ".join(f"v{v}" for v in xs)


def _con_text(con: FlatConstraint) -> str:
    if isinstance(con, LinearCon):
        return f"linear {_terms_text(con.terms)} {con.op} {con.rhs}"
    if isinstance(con, ReifLinear):
        return f"reif {_lit_text(con.lit)} <-> {_terms_text(con.terms)} {con.op} {con.rhs}"
    if isinstance(con, ReifInSet):
        return f"reif {_lit_text(con.lit)} <-> v{con.var} in {{{values_text(con.values)}}}"
    if isinstance(con, ProductCon):
        return f"product v{con.x} * v{con.y} = v{con.z}"
    if isinstance(con, DivCon):
        return f"div v{con.x} / v{con.y} = v{con.z}"
    if isinstance(con, ModCon):
        return f"mod v{con.x} % v{con.y} = v{con.z}"
    if isinstance(con, PowCon):
        return f"pow v{con.x} ** v{con.y} = v{con.z}"
    if isinstance(con, AbsCon):
        return f"abs |v{con.x}| = v{con.z}"
    if isinstance(con, MinCon):
        return f"min [{_vars_text(con.xs)}] = v{con.z}"
    if isinstance(con, MaxCon):
        return f"max [{_vars_text(con.xs)}] = v{con.z}"
    if isinstance(con, AllDiffCon):
        return f"alldiff [{_vars_text(con.xs)}]"
    if isinstance(con, AllDiffExceptCon):
        return f"alldiff-except [{_vars_text(con.xs)}] {con.value}"
    if isinstance(con, GccCon):
        return f"gcc [{_vars_text(con.xs)}] vals ({values_list_text(con.vals)}) counts [{_vars_text(con.counts)}]"
    if isinstance(con, AtleastCon):
        return f"atleast [{_vars_text(con.xs)}] counts ({values_list_text(con.counts)}) vals ({values_list_text(con.vals)})"
    if isinstance(con, AtmostCon):
        return f"atmost [{_vars_text(con.xs)}] counts ({values_list_text(con.counts)}) vals ({values_list_text(con.vals)})"
    if isinstance(con, TableCon):
        rows = " ".join("(" + values_list_text(t) + ")" for t in con.tuples)
        return f"table [{_vars_text(con.scope)}] {rows}"
    if isinstance(con, LexCon):
        op = "<lex" if con.strict else "<=lex"
        return f"lex [{_vars_text(con.xs)}] {op} [{_vars_text(con.ys)}]"
    if isinstance(con, ClauseCon):
        return "clause " + " ".join(_lit_text(l) for l in con.lits)
    raise AssertionError(f"unknown constraint {con!r}")


def values_list_text(vs) -> str:
    return ",".join(str(v) for v in vs)


def dump_flat(csp: FlatCSP) -> str:
    """Stable line-oriented rendering: variables, constraints, then
    directives, one per line."""
    lines = ["flatcsp"]
    for v in csp.variables:
        kind = "bool" if v.is_bool else "int"
        lines.append(f"var v{v.index} {v.name} {kind} {{{values_text(v.values)}}}")
    for con in csp.constraints:
        lines.append("con " + _con_text(con))
    if csp.objective is not None:
        lines.append(f"objective {csp.objective[0]} v{csp.objective[1]}")
    if csp.branching is not None:
        lines.append("branching " + _vars_text(csp.branching))
    if csp.heuristic is not None:
        lines.append(f"heuristic {csp.heuristic}")
    for out in csp.outputs:
        if out.kind == "matrix":
            doms = ",".join(d.text() for d in out.index_doms)
            lines.append(f"output {out.name} matrix {out.base} [{doms}] {_vars_text(out.vars)}")
        else:
            lines.append(f"output {out.name} {out.kind} v{out.vars[0]}")
    if csp.trivially_unsat:
        lines.append("trivially-unsat")
    return "\n".join(lines) + "\n"
