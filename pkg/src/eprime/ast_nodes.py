"""AST for Essence' models: expression nodes, statement nodes, and a printer.

Domains are expressions here: `int(1..3)` and `bool` parse to domain atoms and
combine with `union`/`intersect`/`-` through ordinary BinOp nodes, which is
what lets `x in int(1,3) union int(5)` work with no special grammar. The type
checker keeps domain-typed expressions out of integer positions.

The printer emits a fully parenthesized form; reparsing its output must yield
an identical tree (checked by a property test).
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Node:
    """Base class: a source position plus type annotations filled in later."""

    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __post_init__(self):
        self.etype = None  # set by typecheck
        self.decision = False  # True when a decision variable occurs underneath


# --------------------------------------------------------------------------
# Expressions


@dataclass
class IntLit(Node):
    value: int = 0


@dataclass
class BoolLit(Node):
    value: bool = False


@dataclass
class Ident(Node):
    name: str = ""


@dataclass
class UnaryOp(Node):
    """op is '-', '!', or 'abs' (the |x| form)."""

    op: str = ""
    operand: Node | None = None


@dataclass
class BinOp(Node):
    op: str = ""
    left: Node | None = None
    right: Node | None = None


@dataclass
class Quantifier(Node):
    """forAll / exists / sum with one shared domain for all bound names."""

    kind: str = ""
    names: list[str] = field(default_factory=list)
    domain: Node | None = None
    body: Node | None = None


@dataclass
class MatrixLit(Node):
    elements: list[Node] = field(default_factory=list)
    index_dom: Node | None = None


@dataclass
class Generator:
    names: list[str]
    domain: Node


@dataclass
class Comprehension(Node):
    head: Node | None = None
    generators: list[Generator] = field(default_factory=list)
    conditions: list[Node] = field(default_factory=list)
    index_dom: Node | None = None


class SliceAll:
    """The `..` marker inside a subscript."""

    def __repr__(self) -> str:
        return ".."


SLICE_ALL = SliceAll()


@dataclass
class Subscript(Node):
    """Indexing when no item is SLICE_ALL, slicing otherwise."""

    base: Node | None = None
    items: list = field(default_factory=list)  # Node | SLICE_ALL


@dataclass
class Call(Node):
    """Builtin function or global constraint application, resolved by name."""

    name: str = ""
    args: list[Node] = field(default_factory=list)


@dataclass
class DomItem:
    """One item inside int(...): a single value or a (possibly open) range."""

    lo: Node | None
    hi: Node | None
    is_range: bool


@dataclass
class DomainIntAtom(Node):
    """int(...) literal; items=None means the bare open `int`."""

    items: list[DomItem] | None = None


@dataclass
class DomainBoolAtom(Node):
    pass


@dataclass
class DomainMatrix(Node):
    index_doms: list[Node] = field(default_factory=list)
    base: Node | None = None


# --------------------------------------------------------------------------
# Statements


@dataclass
class Statement:
    line: int = 0
    col: int = 0


@dataclass
class LangHeader(Statement):
    major: int = 1
    minor: int = 0


@dataclass
class Given(Statement):
    names: list[str] = field(default_factory=list)
    domain: Node | None = None


@dataclass
class LettingValue(Statement):
    name: str = ""
    domain: Node | None = None  # optional declared domain
    value: Node | None = None


@dataclass
class LettingDomain(Statement):
    name: str = ""
    domain: Node | None = None


@dataclass
class Find(Statement):
    names: list[str] = field(default_factory=list)
    domain: Node | None = None


@dataclass
class Where(Statement):
    condition: Node | None = None


@dataclass
class Objective(Statement):
    sense: str = "minimising"
    expr: Node | None = None


@dataclass
class BranchingOn(Statement):
    entries: list[Node] = field(default_factory=list)


@dataclass
class Heuristic(Statement):
    name: str = "static"


@dataclass
class SuchThat(Statement):
    constraints: list[Node] = field(default_factory=list)


@dataclass
class Model:
    statements: list[Statement] = field(default_factory=list)

    def of_kind(self, cls) -> list:
        return [s for s in self.statements if isinstance(s, cls)]


# --------------------------------------------------------------------------
# Printer


def _dom_item_text(item: DomItem) -> str:
    if not item.is_range:
        return to_text(item.lo)
    lo = to_text(item.lo) if item.lo is not None else ""
    hi = to_text(item.hi) if item.hi is not None else ""
    return f"{lo}..{hi}"


def to_text(e: Node) -> str:
    """Fully parenthesized concrete syntax for an expression."""
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, UnaryOp):
        if e.op == "abs":
            return f"|{to_text(e.operand)}|"
        return f"({e.op}{to_text(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Quantifier):
        names = ",".join(e.names)
        return f"({e.kind} {names} : {to_text(e.domain)} . {to_text(e.body)})"
    if isinstance(e, MatrixLit):
        inner = ", ".join(to_text(x) for x in e.elements)
        if e.index_dom is not None:
            tail = f" ; {to_text(e.index_dom)}"
        else:
            tail = ""
        return f"[{inner}{tail}]"
    if isinstance(e, Comprehension):
        parts = []
        for g in e.generators:
            parts.append(f"{','.join(g.names)} : {to_text(g.domain)}")
        parts.extend(to_text(c) for c in e.conditions)
        tail = f" ; {to_text(e.index_dom)}" if e.index_dom is not None else ""
        return f"[{to_text(e.head)} | {', '.join(parts)}{tail}]"
    if isinstance(e, Subscript):
        items = ", ".join(".." if isinstance(x, SliceAll) else to_text(x) for x in e.items)
        return f"{_postfix_base_text(e.base)}[{items}]"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_text(a) for a in e.args)})"
    if isinstance(e, DomainIntAtom):
        if e.items is None:
            return "int"
        return f"int({','.join(_dom_item_text(it) for it in e.items)})"
    if isinstance(e, DomainBoolAtom):
        return "bool"
    if isinstance(e, DomainMatrix):
        dims = ", ".join(to_text(d) for d in e.index_doms)
        return f"matrix indexed by [{dims}] of {to_text(e.base)}"
    raise AssertionError(f"unprintable node {e!r}")


def _postfix_base_text(base: Node) -> str:
    # Subscript bases that are themselves atoms print bare; anything else is
    # wrapped so `(a + b)[1]` reparses to the same tree.
    if isinstance(base, (Ident, MatrixLit, Comprehension, Subscript, Call)):
        return to_text(base)
    return f"({to_text(base)})"


def statement_text(s: Statement) -> str:
    if isinstance(s, LangHeader):
        return f"language ESSENCE' {s.major}.{s.minor}"
    if isinstance(s, Given):
        return f"given {', '.join(s.names)} : {to_text(s.domain)}"
    if isinstance(s, LettingValue):
        if s.domain is not None:
            return f"letting {s.name} : {to_text(s.domain)} = {to_text(s.value)}"
        return f"letting {s.name} = {to_text(s.value)}"
    if isinstance(s, LettingDomain):
        return f"letting {s.name} be domain {to_text(s.domain)}"
    if isinstance(s, Find):
        return f"find {', '.join(s.names)} : {to_text(s.domain)}"
    if isinstance(s, Where):
        return f"where {to_text(s.condition)}"
    if isinstance(s, Objective):
        return f"{s.sense} {to_text(s.expr)}"
    if isinstance(s, BranchingOn):
        return f"branching on [{', '.join(to_text(x) for x in s.entries)}]"
    if isinstance(s, Heuristic):
        return f"heuristic {s.name}"
    if isinstance(s, SuchThat):
        return "such that " + ",\n          ".join(to_text(c) for c in s.constraints)
    raise AssertionError(f"unprintable statement {s!r}")


def model_text(m: Model) -> str:
    return "\n".join(statement_text(s) for s in m.statements) + "\n"
