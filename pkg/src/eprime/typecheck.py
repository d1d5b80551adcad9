"""Type and category checking.

Essence' is strongly typed with one implicit conversion: bool widens to int
(false=0, true=1) in any integer context; int never narrows to bool. The
checker inserts explicit toInt(...) wrappers for every coercion so later
stages only ever see well-typed trees (re-checking a checked tree is the
identity: toInt of a bool checks without rewrapping).

Every identifier carries a category: constant (letting), parameter (given),
quantifier (bound variable), or decision (find). Contexts that must not
contain decision variables: all domains (including quantifier and generator
domains and matrix index expressions), where clauses, comprehension
conditions, slice positions, the right operand of `in`, toSet/factorial/
popcount arguments, table tuple lists, gcc value lists, atleast/atmost count
and value lists, and the alldifferent_except excluded value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast_nodes import (
    BinOp,
    BoolLit,
    BranchingOn,
    Call,
    Comprehension,
    DomainBoolAtom,
    DomainIntAtom,
    DomainMatrix,
    Find,
    Given,
    Heuristic,
    Ident,
    IntLit,
    LangHeader,
    LettingDomain,
    LettingValue,
    MatrixLit,
    Model,
    Node,
    Objective,
    Quantifier,
    SliceAll,
    Statement,
    Subscript,
    SuchThat,
    UnaryOp,
    Where,
)
from .domains import (
    INT64_MAX,
    INT64_MIN,
    interval_abs,
    interval_add,
    interval_div,
    interval_max,
    interval_min,
    interval_mod,
    interval_mul,
    interval_pow,
    interval_sub,
)
from .errors import EvalError, TypeCheckError

# --------------------------------------------------------------------------
# Types

T_INT = "int"
T_BOOL = "bool"


@dataclass(frozen=True)
class TMatrix:
    index_kinds: tuple  # 'int' | 'bool' per dimension
    base: str  # T_INT | T_BOOL

    def ndim(self) -> int:
        return len(self.index_kinds)

    def __str__(self) -> str:
        return f"{self.ndim()}-dimensional matrix of {self.base}"


@dataclass(frozen=True)
class TDomain:
    kind: str  # 'int' | 'bool' | 'matrix'

    def __str__(self) -> str:
        return f"{self.kind} domain"


@dataclass(frozen=True)
class TSet:
    base: str

    def __str__(self) -> str:
        return f"set of {self.base}"


T_EMPTY_MATRIX = "empty-matrix"

# Categories, ordered: an expression's category is the max over its leaves.
CAT_CONST = 0
CAT_PARAM = 1
CAT_QUANT = 2
CAT_DECISION = 3
CAT_NAMES = {CAT_CONST: "constant", CAT_PARAM: "parameter", CAT_QUANT: "quantifier variable", CAT_DECISION: "decision variable"}


@dataclass
class Symbol:
    name: str
    type: object
    category: int
    domain_expr: Node | None = None  # for given/find/letting-domain and declared lettings
    value_expr: Node | None = None  # for letting values


@dataclass
class TypedModel:
    model: Model
    symbols: dict = field(default_factory=dict)
    params: bool = False  # True when checked as a parameter file


ARITH_OPS = frozenset(["+", "-", "*", "/", "%", "**"])
COMPARE_OPS = frozenset(["=", "!=", "<", "<=", ">", ">="])
LEX_OPS = frozenset(["<=lex", "<lex", ">=lex", ">lex"])
BOOL_OPS = frozenset(["/\\", "\\/", "->", "<->"])
DOMAIN_OPS = frozenset(["union", "intersect", "-"])

FUNCTIONS = frozenset(
    [
        "toInt",
        "toSet",
        "min",
        "max",
        "sum",
        "product",
        "and",
        "or",
        "flatten",
        "factorial",
        "popcount",
        "allDiff",
        "alldifferent_except",
        "gcc",
        "atleast",
        "atmost",
        "table",
    ]
)


def _err(msg: str, node) -> TypeCheckError:
    return TypeCheckError(msg, getattr(node, "line", None), getattr(node, "col", None))


class _Checker:
    def __init__(self):
        self.symbols: dict[str, Symbol] = {}

    # -- scope -------------------------------------------------------------

    def declare(self, name: str, sym: Symbol, node):
        if name in self.symbols:
            raise _err(f"{name!r} is already declared", node)
        self.symbols[name] = sym

    def bind_scoped(self, names: list[str], typ, node) -> list[str]:
        # Bound variables count as constants for category purposes: scoping
        # already keeps them from escaping, and expansion replaces them with
        # ground values, so a closed quantification over parameters is itself
        # parameter-category (e.g. legal in a where clause).
        for n in names:
            if n in self.symbols:
                raise _err(f"{n!r} shadows an existing declaration", node)
            self.symbols[n] = Symbol(n, typ, CAT_CONST)
        return names

    def unbind(self, names: list[str]):
        for n in names:
            del self.symbols[n]

    # -- expressions ---------------------------------------------------------

    def check(self, e: Node):
        """Type an expression; sets e.etype, e.decision, e.category."""
        t, cat = self._check(e)
        e.etype = t
        e.category = cat
        e.decision = cat == CAT_DECISION
        return e

    def _type_of(self, e: Node):
        self.check(e)
        return e.etype

    def coerce_bool_to_int(self, e: Node) -> Node:
        """Wrap a checked bool expression in toInt so it reads as int."""
        if e.etype == T_BOOL:
            w = Call(e.line, e.col, "toInt", [e])
            w.etype = T_INT
            w.category = e.category
            w.decision = e.decision
            return w
        return e

    def int_operand(self, e: Node, what: str) -> Node:
        self.check(e)
        if e.etype == T_BOOL:
            return self.coerce_bool_to_int(e)
        if e.etype != T_INT:
            raise _err(f"{what} must be an integer, not {e.etype}", e)
        return e

    def bool_operand(self, e: Node, what: str) -> Node:
        self.check(e)
        if e.etype != T_BOOL:
            raise _err(f"{what} must be boolean, not {e.etype} (int does not convert to bool)", e)
        return e

    def _check(self, e: Node):
        if isinstance(e, IntLit):
            return T_INT, CAT_CONST
        if isinstance(e, BoolLit):
            return T_BOOL, CAT_CONST
        if isinstance(e, Ident):
            sym = self.symbols.get(e.name)
            if sym is None:
                raise _err(f"undeclared identifier {e.name!r}", e)
            return sym.type, sym.category
        if isinstance(e, UnaryOp):
            return self._check_unary(e)
        if isinstance(e, BinOp):
            return self._check_binop(e)
        if isinstance(e, Quantifier):
            return self._check_quantifier(e)
        if isinstance(e, MatrixLit):
            return self._check_matrix_lit(e)
        if isinstance(e, Comprehension):
            return self._check_comprehension(e)
        if isinstance(e, Subscript):
            return self._check_subscript(e)
        if isinstance(e, Call):
            return self._check_call(e)
        if isinstance(e, DomainIntAtom):
            return self._check_int_domain_atom(e)
        if isinstance(e, DomainBoolAtom):
            return TDomain("bool"), CAT_CONST
        if isinstance(e, DomainMatrix):
            return self._check_matrix_domain(e)
        raise AssertionError(f"unknown node {e!r}")

    def _check_unary(self, e: UnaryOp):
        if e.op == "!":
            e.operand = self.bool_operand(e.operand, "operand of !")
            return T_BOOL, e.operand.category
        e.operand = self.int_operand(e.operand, f"operand of {'|...|' if e.op == 'abs' else 'unary -'}")
        return T_INT, e.operand.category

    def _check_binop(self, e: BinOp):
        # `-` doubles as domain subtraction: decide by the left operand's type
        if e.op in DOMAIN_OPS:
            lt = self._type_of(e.left)
            if isinstance(lt, TDomain) or e.op != "-":
                rt = self._type_of(e.right)
                if not isinstance(lt, TDomain) or not isinstance(rt, TDomain):
                    raise _err(f"{e.op} expects two domains", e)
                if lt.kind == "matrix" or rt.kind == "matrix":
                    raise _err(f"{e.op} is not defined on matrix domains", e)
                if lt.kind != rt.kind:
                    raise _err(f"cannot mix {lt.kind} and {rt.kind} domains with {e.op}", e)
                self._require_nondecision(e.left, "domains")
                self._require_nondecision(e.right, "domains")
                return TDomain(lt.kind), max(e.left.category, e.right.category)
            # fall through: integer subtraction (left already checked)
        if e.op in ARITH_OPS:
            e.left = self.int_operand(e.left, f"left operand of {e.op}")
            e.right = self.int_operand(e.right, f"right operand of {e.op}")
            return T_INT, max(e.left.category, e.right.category)
        if e.op in COMPARE_OPS:
            return self._check_compare(e)
        if e.op in LEX_OPS:
            for side in (e.left, e.right):
                t = self._type_of(side)
                if not isinstance(t, TMatrix) or t.ndim() != 1:
                    raise _err(f"{e.op} compares one-dimensional matrices, not {t}", side)
            return T_BOOL, max(e.left.category, e.right.category)
        if e.op in BOOL_OPS:
            e.left = self.bool_operand(e.left, f"left operand of {e.op}")
            e.right = self.bool_operand(e.right, f"right operand of {e.op}")
            return T_BOOL, max(e.left.category, e.right.category)
        if e.op == "in":
            rt = self._type_of(e.right)
            self._require_nondecision(e.right, "the right operand of `in`")
            if isinstance(rt, TDomain) and rt.kind == "bool":
                e.left = self.bool_operand(e.left, "left operand of `in`")
            elif isinstance(rt, TDomain) and rt.kind == "int" or isinstance(rt, TSet):
                e.left = self.int_operand(e.left, "left operand of `in`")
            else:
                raise _err(f"right operand of `in` must be an int/bool domain or a toSet result, not {rt}", e)
            return T_BOOL, max(e.left.category, e.right.category)
        raise AssertionError(f"unknown operator {e.op!r}")

    def _check_compare(self, e: BinOp):
        lt = self._type_of(e.left)
        rt = self._type_of(e.right)
        if e.op in ("=", "!="):
            if isinstance(lt, TMatrix) and isinstance(rt, TMatrix):
                if lt.ndim() != 1 or rt.ndim() != 1:
                    raise _err("matrix equality is defined for one-dimensional matrices only", e)
                return T_BOOL, max(e.left.category, e.right.category)
            if isinstance(lt, TSet) and isinstance(rt, TSet):
                return T_BOOL, max(e.left.category, e.right.category)
        for t, side in ((lt, e.left), (rt, e.right)):
            if t not in (T_INT, T_BOOL):
                raise _err(f"{e.op} cannot compare {t}", side)
        e.left = self.coerce_bool_to_int(e.left)
        e.right = self.coerce_bool_to_int(e.right)
        return T_BOOL, max(e.left.category, e.right.category)

    def _check_quantifier(self, e: Quantifier):
        t = self._check_domain_expr(e.domain)
        self._require_nondecision(e.domain, "quantifier domains")
        bound = self.bind_scoped(e.names, self._instance_type(t, e.domain), e)
        try:
            if e.kind == "sum":
                e.body = self.int_operand(e.body, "the body of sum")
                result = T_INT
            else:
                e.body = self.bool_operand(e.body, f"the body of {e.kind}")
                result = T_BOOL
            cat = max(e.body.category, e.domain.category)
        finally:
            self.unbind(bound)
        return result, cat

    def _instance_type(self, t: TDomain, dom_expr: Node):
        """The type of a value drawn from a domain."""
        if t.kind == "int":
            return T_INT
        if t.kind == "bool":
            return T_BOOL
        # matrix domain: index kinds and base are statically visible, possibly
        # through a chain of named domains
        if isinstance(dom_expr, Ident):
            sym = self.symbols.get(dom_expr.name)
            if sym is not None and sym.domain_expr is not None:
                return self._instance_type(t, sym.domain_expr)
        if isinstance(dom_expr, DomainMatrix):
            kinds = tuple(self._domain_kind(d) for d in dom_expr.index_doms)
            base = self._domain_kind(dom_expr.base)
            return TMatrix(kinds, base)
        raise _err("matrix domain expressions must be written literally or named here", dom_expr)

    def _domain_kind(self, d: Node) -> str:
        t = d.etype if d.etype is not None else self._check_domain_expr(d)
        if not isinstance(t, TDomain) or t.kind == "matrix":
            raise _err(f"expected an int or bool domain, found {t}", d)
        return t.kind

    def _check_matrix_lit(self, e: MatrixLit):
        cat = CAT_CONST
        if e.index_dom is not None:
            it = self._check_domain_expr(e.index_dom)
            if it.kind == "matrix":
                raise _err("a matrix index domain must be int or bool", e.index_dom)
            self._require_nondecision(e.index_dom, "index domains")
            cat = e.index_dom.category
        if not e.elements:
            return T_EMPTY_MATRIX, cat
        types = []
        for el in e.elements:
            types.append(self._type_of(el))
            cat = max(cat, el.category)
        first = types[0]
        for t, el in zip(types, e.elements):
            if t != first:
                raise _err(f"matrix entries must all have the same type ({t} vs {first})", el)
        if first == T_EMPTY_MATRIX:
            raise _err("matrix entries of unknown type (nested empty literals)", e)
        index_kind = "int" if e.index_dom is None else e.index_dom.etype.kind
        if isinstance(first, TMatrix):
            return TMatrix((index_kind,) + first.index_kinds, first.base), cat
        return TMatrix((index_kind,), first), cat

    def _check_comprehension(self, e: Comprehension):
        bound: list[str] = []
        cat = CAT_CONST
        try:
            for g in e.generators:
                t = self._check_domain_expr(g.domain)
                self._require_nondecision(g.domain, "generator domains")
                cat = max(cat, g.domain.category)
                bound.extend(self.bind_scoped(g.names, self._instance_type(t, g.domain), g.domain))
            for i, c in enumerate(e.conditions):
                e.conditions[i] = self.bool_operand(c, "comprehension conditions")
                self._require_nondecision(e.conditions[i], "comprehension conditions")
                cat = max(cat, e.conditions[i].category)
            head_t = self._type_of(e.head)
            cat = max(cat, e.head.category)
        finally:
            self.unbind(bound)
        if e.index_dom is not None:
            it = self._check_domain_expr(e.index_dom)
            if it.kind == "matrix":
                raise _err("a matrix index domain must be int or bool", e.index_dom)
            self._require_nondecision(e.index_dom, "index domains")
            cat = max(cat, e.index_dom.category)
        index_kind = "int" if e.index_dom is None else e.index_dom.etype.kind
        if isinstance(head_t, TMatrix):
            return TMatrix((index_kind,) + head_t.index_kinds, head_t.base), cat
        if head_t in (T_INT, T_BOOL):
            return TMatrix((index_kind,), head_t), cat
        raise _err(f"comprehension elements must be int, bool, or matrices, not {head_t}", e.head)

    def _check_subscript(self, e: Subscript):
        bt = self._type_of(e.base)
        if not isinstance(bt, TMatrix):
            raise _err(f"only matrices can be indexed, not {bt}", e.base)
        if len(e.items) != bt.ndim():
            raise _err(f"matrix of {bt.ndim()} dimensions subscripted with {len(e.items)} positions", e)
        cat = e.base.category
        kept = 0
        for i, (item, kind) in enumerate(zip(e.items, bt.index_kinds)):
            if isinstance(item, SliceAll):
                kept += 1
                continue
            if kind == "bool":
                e.items[i] = self.bool_operand(item, "a bool-indexed position")
            else:
                e.items[i] = self.int_operand(item, "an int-indexed position")
            if e.items[i].category == CAT_DECISION:
                raise _err("decision-variable matrix indices are not supported", item)
            cat = max(cat, e.items[i].category)
        if kept:
            # slices are reindexed contiguously from 1, so kept dims become int
            return TMatrix(("int",) * kept, bt.base), cat
        return bt.base, cat

    # -- calls -------------------------------------------------------------

    def _check_call(self, e: Call):
        name = e.name
        if name not in FUNCTIONS:
            raise _err(f"unknown function {name!r}", e)
        if name == "toInt":
            self._arity(e, 1)
            e.args[0] = self.bool_operand(e.args[0], "toInt argument")
            return T_INT, e.args[0].category
        if name == "toSet":
            self._arity(e, 1)
            t = self._matrix_arg(e, 0, ndim=1)
            self._require_nondecision(e.args[0], "toSet arguments")
            return TSet(t.base), e.args[0].category
        if name in ("min", "max"):
            if len(e.args) == 1:
                self._matrix_arg(e, 0, ndim=1)
                return T_INT, e.args[0].category
            self._arity(e, 2)
            e.args[0] = self.int_operand(e.args[0], f"{name} argument")
            e.args[1] = self.int_operand(e.args[1], f"{name} argument")
            return T_INT, max(a.category for a in e.args)
        if name in ("sum", "product"):
            self._arity(e, 1)
            self._matrix_arg(e, 0, ndim=1)
            return T_INT, e.args[0].category
        if name in ("and", "or"):
            self._arity(e, 1)
            t = self._matrix_arg(e, 0, ndim=1)
            if t.base != T_BOOL:
                raise _err(f"{name} expects a matrix of booleans", e.args[0])
            return T_BOOL, e.args[0].category
        if name == "flatten":
            if len(e.args) == 1:
                self._matrix_arg(e, 0)
                return TMatrix(("int",), e.args[0].etype.base), e.args[0].category
            self._arity(e, 2)
            n_node = e.args[0]
            if not isinstance(n_node, IntLit):
                raise _err("the dimension count of flatten must be an integer literal", n_node)
            self.check(n_node)
            t = self._matrix_arg(e, 1)
            n = n_node.value
            if n < 0:
                raise _err("the dimension count of flatten must be non-negative", n_node)
            if n + 1 > t.ndim():
                raise _err(f"flatten({n}, _) needs at least {n + 1} dimensions, matrix has {t.ndim()}", e)
            if n == 0:
                return t, e.args[1].category  # flatten(0, X) is X unchanged
            return TMatrix(("int",) + t.index_kinds[n + 1 :], t.base), e.args[1].category
        if name in ("factorial", "popcount"):
            self._arity(e, 1)
            e.args[0] = self.int_operand(e.args[0], f"{name} argument")
            self._require_nondecision(e.args[0], f"{name} arguments")
            return T_INT, e.args[0].category
        if name == "allDiff":
            self._arity(e, 1)
            self._matrix_arg(e, 0, ndim=1)
            return T_BOOL, e.args[0].category
        if name == "alldifferent_except":
            self._arity(e, 2)
            self._matrix_arg(e, 0, ndim=1)
            e.args[1] = self.int_operand(e.args[1], "the excluded value")
            self._require_nondecision(e.args[1], "the excluded value of alldifferent_except")
            return T_BOOL, max(a.category for a in e.args)
        if name == "gcc":
            self._arity(e, 3)
            self._matrix_arg(e, 0, ndim=1)
            self._matrix_arg(e, 1, ndim=1)
            self._require_nondecision(e.args[1], "gcc value lists")
            self._matrix_arg(e, 2, ndim=1)
            return T_BOOL, max(a.category for a in e.args)
        if name in ("atleast", "atmost"):
            self._arity(e, 3)
            self._matrix_arg(e, 0, ndim=1)
            self._matrix_arg(e, 1, ndim=1)
            self._require_nondecision(e.args[1], f"{name} count lists")
            self._matrix_arg(e, 2, ndim=1)
            self._require_nondecision(e.args[2], f"{name} value lists")
            return T_BOOL, max(a.category for a in e.args)
        if name == "table":
            self._arity(e, 2)
            self._matrix_arg(e, 0, ndim=1)
            self._matrix_arg(e, 1, ndim=2)
            self._require_nondecision(e.args[1], "table tuple lists")
            return T_BOOL, max(a.category for a in e.args)
        raise AssertionError(name)

    def _arity(self, e: Call, n: int):
        if len(e.args) != n:
            raise _err(f"{e.name} expects {n} argument{'s' if n != 1 else ''}, got {len(e.args)}", e)

    def _matrix_arg(self, e: Call, i: int, ndim: int | None = None) -> TMatrix:
        t = self._type_of(e.args[i])
        if t == T_EMPTY_MATRIX:
            # [] with an explicit index domain but unknown base: treat as an
            # int matrix of the right shape for the builtin's purposes
            lit = e.args[i]
            if isinstance(lit, MatrixLit) and lit.index_dom is not None and (ndim in (None, 1)):
                t = TMatrix((lit.index_dom.etype.kind,), T_INT)
                lit.etype = t
                return t
            raise _err("empty matrix literal needs an explicit index domain and a known base type", e.args[i])
        if not isinstance(t, TMatrix):
            raise _err(f"argument {i + 1} of {e.name} must be a matrix, not {t}", e.args[i])
        if ndim is not None and t.ndim() != ndim:
            raise _err(f"argument {i + 1} of {e.name} must be {ndim}-dimensional, got {t.ndim()}", e.args[i])
        return t

    # -- domains -----------------------------------------------------------

    def _check_domain_expr(self, d: Node) -> TDomain:
        t = self._type_of(d)
        if not isinstance(t, TDomain):
            raise _err(f"expected a domain, found {t}", d)
        return t

    def _check_int_domain_atom(self, e: DomainIntAtom):
        cat = CAT_CONST
        if e.items is not None:
            for item in e.items:
                if item.lo is not None:
                    item.lo = self.int_operand(item.lo, "domain endpoints")
                    cat = max(cat, item.lo.category)
                if item.hi is not None:
                    item.hi = self.int_operand(item.hi, "domain endpoints")
                    cat = max(cat, item.hi.category)
        if cat == CAT_DECISION:
            raise _err("domains cannot contain decision variables", e)
        return TDomain("int"), cat

    def _check_matrix_domain(self, e: DomainMatrix):
        cat = CAT_CONST
        for d in e.index_doms:
            t = self._check_domain_expr(d)
            if t.kind == "matrix":
                raise _err("matrix index domains must be int or bool", d)
            cat = max(cat, d.category)
        bt = self._check_domain_expr(e.base)
        if bt.kind == "matrix":
            raise _err("the base of a matrix domain must be int or bool", e.base)
        cat = max(cat, e.base.category)
        return TDomain("matrix"), cat

    def _require_nondecision(self, e: Node, what: str):
        if getattr(e, "category", CAT_CONST) == CAT_DECISION or getattr(e, "decision", False):
            raise _err(f"{what} cannot contain decision variables", e)

    # -- statements ----------------------------------------------------------

    def check_statement(self, s: Statement, state: dict):
        if isinstance(s, LangHeader):
            return
        if isinstance(s, Given):
            t = self._check_domain_expr(s.domain)
            self._require_nondecision(s.domain, "domains")
            if s.domain.category > CAT_PARAM:
                raise _err("given domains may reference parameters and constants only", s.domain)
            for n in s.names:
                self.declare(n, Symbol(n, self._declared_type(t, s.domain), CAT_PARAM, domain_expr=s.domain), s)
            return
        if isinstance(s, LettingValue):
            self.check(s.value)
            if s.value.category > CAT_PARAM:
                raise _err("letting values may reference parameters and constants only", s.value)
            vt = s.value.etype
            cat = max(CAT_CONST, s.value.category)
            if s.domain is not None:
                dt = self._check_domain_expr(s.domain)
                self._require_nondecision(s.domain, "domains")
                declared = self._declared_type(dt, s.domain)
                if vt == T_EMPTY_MATRIX and isinstance(declared, TMatrix):
                    vt = declared
                    s.value.etype = declared
                if isinstance(declared, TMatrix) and isinstance(vt, TMatrix):
                    # index kinds need not match: the value is reindexed to the
                    # declared index domains when the model is instantiated
                    if declared.ndim() != vt.ndim() or declared.base != vt.base:
                        raise _err(f"letting {s.name!r}: declared {declared}, value is {vt}", s.value)
                    vt = declared
                elif vt != declared:
                    raise _err(f"letting {s.name!r}: declared {declared}, value is {vt}", s.value)
            if vt == T_EMPTY_MATRIX:
                raise _err("empty matrix literal needs a declared matrix domain", s.value)
            if isinstance(vt, TDomain):
                raise _err("use `letting ... be domain` to name a domain", s.value)
            self.declare(s.name, Symbol(s.name, vt, cat, domain_expr=s.domain, value_expr=s.value), s)
            return
        if isinstance(s, LettingDomain):
            t = self._check_domain_expr(s.domain)
            self._require_nondecision(s.domain, "domains")
            if s.domain.category > CAT_PARAM:
                raise _err("domain definitions may reference parameters and constants only", s.domain)
            self.declare(s.name, Symbol(s.name, TDomain(t.kind), s.domain.category, domain_expr=s.domain), s)
            return
        if isinstance(s, Find):
            t = self._check_domain_expr(s.domain)
            self._require_nondecision(s.domain, "domains")
            if s.domain.category > CAT_PARAM:
                raise _err("find domains may reference parameters and constants only", s.domain)
            if isinstance(s.domain, DomainIntAtom):
                if s.domain.items is None or any(i.lo is None or (i.is_range and i.hi is None) for i in s.domain.items):
                    raise _err("find domains must be finite", s.domain)
            for n in s.names:
                self.declare(n, Symbol(n, self._declared_type(t, s.domain), CAT_DECISION, domain_expr=s.domain), s)
            return
        if isinstance(s, Where):
            if state["objective_seen"]:
                raise _err("where statements must precede the objective", s.condition)
            s.condition = self.bool_operand(s.condition, "where conditions")
            self._require_nondecision(s.condition, "where conditions")
            if s.condition.category > CAT_PARAM:
                raise _err("where conditions may reference parameters and constants only", s.condition)
            return
        if isinstance(s, Objective):
            if state["objective_seen"]:
                raise _err("a model may have at most one objective", s.expr)
            state["objective_seen"] = True
            s.expr = self.int_operand(s.expr, "the objective")
            return
        if isinstance(s, BranchingOn):
            for entry in s.entries:
                t = self._type_of(entry)
                if not (t in (T_INT, T_BOOL) or isinstance(t, TMatrix)):
                    raise _err(f"branching on entries must be decision variables or matrices, not {t}", entry)
            return
        if isinstance(s, Heuristic):
            return
        if isinstance(s, SuchThat):
            for i, c in enumerate(s.constraints):
                s.constraints[i] = self.bool_operand(c, "constraints")
            return
        raise AssertionError(f"unknown statement {s!r}")

    def _declared_type(self, t: TDomain, dom_expr: Node):
        return self._instance_type(t, dom_expr)


def check_model(model: Model) -> TypedModel:
    """Type-check a model; returns the model with annotations plus the symbol
    table. Checking is idempotent: inserted toInt wrappers re-check cleanly."""
    checker = _Checker()
    state = {"objective_seen": False}
    for s in model.statements:
        checker.check_statement(s, state)
    return TypedModel(model, checker.symbols)


def check_param_model(params: Model) -> TypedModel:
    """Type-check a parameter file in isolation: lettings only, evaluated in
    their own scope (bindings may reference earlier bindings)."""
    checker = _Checker()
    state = {"objective_seen": False}
    for s in params.statements:
        if isinstance(s, (LangHeader, LettingValue)):
            checker.check_statement(s, state)
        else:
            raise _err("parameter files may contain only letting value bindings", s)
    return TypedModel(params, checker.symbols, params=True)


# --------------------------------------------------------------------------
# Bounds inference (interval arithmetic over the totalized semantics)


def infer_bounds(e: Node, env: dict) -> tuple:
    """[lo, hi] interval for a checked int or bool expression. env maps
    variable names to (lo, hi) pairs. Sound but not tight; unsupported forms
    widen to the 64-bit range. Results are clipped at the 64-bit bounds."""
    lo, hi = _bounds(e, env)
    return (max(lo, INT64_MIN), min(hi, INT64_MAX))


_WIDE = (INT64_MIN, INT64_MAX)


def _bounds(e: Node, env: dict) -> tuple:
    if isinstance(e, IntLit):
        return (e.value, e.value)
    if isinstance(e, BoolLit):
        v = 1 if e.value else 0
        return (v, v)
    if isinstance(e, Ident):
        if e.name in env:
            return env[e.name]
        return _WIDE
    if isinstance(e, UnaryOp):
        a = _bounds(e.operand, env)
        if e.op == "-":
            return (-a[1], -a[0])
        if e.op == "abs":
            return interval_abs(a)
        return (0, 1)  # !
    if isinstance(e, BinOp):
        if e.op in COMPARE_OPS or e.op in BOOL_OPS or e.op in LEX_OPS or e.op == "in":
            return (0, 1)
        a = _bounds(e.left, env)
        b = _bounds(e.right, env)
        try:
            if e.op == "+":
                return interval_add(a, b)
            if e.op == "-":
                return interval_sub(a, b)
            if e.op == "*":
                return interval_mul(a, b)
            if e.op == "/":
                return interval_div(a, b)
            if e.op == "%":
                return interval_mod(a, b)
            if e.op == "**":
                return interval_pow(a, b)
        except EvalError:
            return _WIDE  # interval endpoints overflow 64 bits: widen, callers clip
        return _WIDE
    if isinstance(e, Call):
        if e.name == "toInt":
            return (0, 1)
        if e.name in ("min", "max") and len(e.args) == 2:
            a = _bounds(e.args[0], env)
            b = _bounds(e.args[1], env)
            return interval_min(a, b) if e.name == "min" else interval_max(a, b)
        if e.name == "popcount":
            return (0, 64)
        if e.name == "factorial":
            return (0, 2432902008176640000)  # 20!
    if isinstance(e, Quantifier) and e.kind in ("forAll", "exists"):
        return (0, 1)
    return _WIDE
