"""Expansion of an instantiated model into a FlatCSP.

Three stages:

1. expand — substitute parameter and bound-variable values, unroll
   quantifiers and comprehensions, resolve all matrix structure (literals,
   indexing, slicing, flatten), and fold every decision-free subtree with
   eval_ground. The result is a symbolic tree whose leaves are ground values
   and references to flat decision variables. Ground undefinedness is
   decided here: boolean nodes that directly contain an undefined value
   become `false`; integer/matrix nodes become an undefined marker.

2. totalize — replace the remaining partial operations (/, %, ** over
   decision expressions, plus undefined markers) by total versions
   (defaulting to 0) and conjoin their definedness conditions at the
   closest boolean ancestor. After this stage the tree is defined
   everywhere. Applied to the objective, leftover conditions surface as
   top-level constraints.

3. flatten — decompose the total trees into catalogue constraints
   (see flatcsp), introducing auxiliary variables whose domains are the
   exact reachable value sets when small, or interval hulls under a size
   cap otherwise. Global constraints keep their strong form at the top
   level and decompose into primitive formulas under negation or
   reification.

One enumeration budget covers the whole expansion, so the total number of
unrolled bindings is capped (EPRIME_ENUM_CAP).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as _cartesian

from .ast_nodes import (
    BinOp,
    BranchingOn,
    Call,
    Comprehension,
    Heuristic,
    Ident,
    MatrixLit,
    Node,
    Objective,
    Quantifier,
    SliceAll,
    Subscript,
    SuchThat,
    UnaryOp,
)
from .domains import (
    BoolD,
    IntD,
    MatrixD,
    MatrixVal,
    SetValue,
    UNDEF,
    check_int64,
    domain_enumerate,
    enumeration_cap,
    interval_abs,
    interval_add,
    interval_div,
    interval_min,
    interval_max,
    interval_mod,
    interval_mul,
    interval_pow,
    interval_sub,
    normalize_int_domain,
    safe_div,
    safe_mod,
    safe_pow,
)
from .errors import EvalError
from .flatcsp import (
    AbsCon,
    AllDiffCon,
    AllDiffExceptCon,
    AtleastCon,
    AtmostCon,
    ClauseCon,
    DivCon,
    FlatCSP,
    GccCon,
    LexCon,
    LinearCon,
    MaxCon,
    MinCon,
    ModCon,
    Output,
    PowCon,
    ProductCon,
    ReifInSet,
    ReifLinear,
    TableCon,
)
from .instantiate import Instance, _Budget, domain_values, eval_ground, index_slice_of, iter_bindings
from .typecheck import T_BOOL, TMatrix

# Exact reachable-set computation caps: beyond these the interval hull is used.
_PAIR_CAP = 4096
_SET_CAP = 4096


# --------------------------------------------------------------------------
# Symbolic tree (the IR between expansion and flattening)


@dataclass
class GInt:
    v: int


@dataclass
class GBool:
    v: bool


@dataclass
class GUndef:
    """A ground-undefined integer or matrix value awaiting totalization."""

    kind: str  # 'int' | 'matrix'


@dataclass
class VarRef:
    ix: int
    name: str
    values: frozenset
    is_bool: bool = False


@dataclass
class SUn:
    op: str  # '-', 'abs', '!'
    a: object
    pos: tuple = (0, 0)


@dataclass
class SBin:
    op: str
    a: object
    b: object
    pos: tuple = (0, 0)


@dataclass
class SNary:
    op: str  # 'sum', 'product', 'min', 'max'
    items: list
    pos: tuple = (0, 0)


@dataclass
class SAnd:
    items: list


@dataclass
class SOr:
    items: list


@dataclass
class SToInt:
    a: object
    pos: tuple = (0, 0)


@dataclass
class SGlobal:
    name: str
    args: list
    pos: tuple = (0, 0)


@dataclass
class SMat:
    """A matrix of symbolic elements, flat row-major like MatrixVal."""

    doms: tuple
    elems: list

    def dim_values(self) -> list[list]:
        return [list(domain_enumerate(d)) for d in self.doms]

    def position(self, ixs) -> int | None:
        pos = 0
        for d, vals, ix in zip(self.doms, self.dim_values(), ixs):
            if isinstance(d, BoolD):
                if not isinstance(ix, bool) or ix not in vals:
                    return None
            elif isinstance(ix, bool) or int(ix) not in vals:
                return None
            pos = pos * len(vals) + vals.index(ix)
        return pos


_COMPARE_OPS = frozenset({"=", "!=", "<", "<=", ">", ">="})
_LEX_OPS = frozenset({"<=lex", "<lex", ">=lex", ">lex"})
_BOOL_OPS = frozenset({"/\\", "\\/", "->", "<->"})
_ARITH_OPS = frozenset({"+", "-", "*", "/", "%", "**"})


def is_bool_tree(t) -> bool:
    if isinstance(t, GBool):
        return True
    if isinstance(t, VarRef):
        return t.is_bool
    if isinstance(t, SUn):
        return t.op == "!"
    if isinstance(t, SBin):
        return t.op in _COMPARE_OPS or t.op in _LEX_OPS or t.op in _BOOL_OPS or t.op == "in"
    if isinstance(t, (SAnd, SOr, SGlobal)):
        return True
    return False


# --------------------------------------------------------------------------
# Smart constructors (fold ground operands as they appear)


def make_not(a):
    if isinstance(a, GBool):
        return GBool(not a.v)
    if isinstance(a, SUn) and a.op == "!":
        return a.a
    return SUn("!", a)


def make_and(items):
    flat = []
    for it in items:
        if isinstance(it, GBool):
            if not it.v:
                return GBool(False)
            continue
        if isinstance(it, SAnd):
            flat.extend(it.items)
            continue
        flat.append(it)
    if not flat:
        return GBool(True)
    if len(flat) == 1:
        return flat[0]
    return SAnd(flat)


def make_or(items):
    flat = []
    for it in items:
        if isinstance(it, GBool):
            if it.v:
                return GBool(True)
            continue
        if isinstance(it, SOr):
            flat.extend(it.items)
            continue
        flat.append(it)
    if not flat:
        return GBool(False)
    if len(flat) == 1:
        return flat[0]
    return SOr(flat)


_CMP_EVAL = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def make_cmp(op: str, a, b, pos=(0, 0)):
    if isinstance(a, GInt) and isinstance(b, GInt):
        return GBool(_CMP_EVAL[op](a.v, b.v))
    return SBin(op, a, b, pos)


def make_imp(a, b):
    return make_or([make_not(a), b])


def make_iff(a, b):
    if isinstance(a, GBool):
        return b if a.v else make_not(b)
    if isinstance(b, GBool):
        return a if b.v else make_not(a)
    return SBin("<->", a, b)


def undef_of(e: Node):
    """The expansion of a node whose value is undefined."""
    if e.etype == T_BOOL:
        return GBool(False)
    if isinstance(e.etype, TMatrix):
        return GUndef("matrix")
    return GUndef("int")


# --------------------------------------------------------------------------
# Stage 1: expansion


class _Expander:
    def __init__(self, env: dict, finds: dict, budget: _Budget):
        self.env = dict(env)
        self.finds = finds
        self.budget = budget

    def expand(self, e: Node):
        if not e.decision:
            return self._ground(eval_ground(e, self.env, self.budget), e)
        if isinstance(e, Ident):
            return self.finds[e.name]
        if isinstance(e, UnaryOp):
            return self._unary(e)
        if isinstance(e, BinOp):
            return self._binop(e)
        if isinstance(e, Quantifier):
            return self._quantifier(e)
        if isinstance(e, Comprehension):
            return self._comprehension(e)
        if isinstance(e, MatrixLit):
            return self._matrix_lit(e)
        if isinstance(e, Subscript):
            return self._subscript(e)
        if isinstance(e, Call):
            return self._call(e)
        raise AssertionError(f"cannot expand {e!r}")

    def _ground(self, v, e: Node):
        if v is UNDEF:
            return undef_of(e)
        if isinstance(v, bool):
            return GBool(v)
        if isinstance(v, int):
            return GInt(v)
        if isinstance(v, MatrixVal):
            return SMat(v.index_doms, [GBool(x) if isinstance(x, bool) else GInt(x) for x in v.elements])
        if isinstance(v, (IntD, BoolD, SetValue)):
            return v
        raise AssertionError(f"unexpected ground value {v!r}")

    def _unary(self, e: UnaryOp):
        a = self.expand(e.operand)
        if e.op == "!":
            return make_not(a)
        if isinstance(a, GUndef):
            return GUndef("int")
        return SUn(e.op, a, (e.line, e.col))

    def _binop(self, e: BinOp):
        op = e.op
        pos = (e.line, e.col)
        if op in _BOOL_OPS:
            a = self.expand(e.left)
            b = self.expand(e.right)
            if op == "/\\":
                return make_and([a, b])
            if op == "\\/":
                return make_or([a, b])
            if op == "->":
                return make_imp(a, b)
            return make_iff(a, b)
        if op == "in":
            a = self.expand(e.left)
            dom = eval_ground(e.right, self.env, self.budget)
            if isinstance(a, GUndef) or dom is UNDEF:
                return GBool(False)
            if isinstance(dom, BoolD):
                return GBool(True)  # bool is the complete boolean domain
            if isinstance(a, GBool):
                a = GInt(int(a.v))
            return SBin("in", a, dom, pos)
        a = self.expand(e.left)
        b = self.expand(e.right)
        if op in _ARITH_OPS:
            if isinstance(a, GUndef) or isinstance(b, GUndef):
                return GUndef("int")
            return SBin(op, a, b, pos)
        if op in _LEX_OPS or (op in ("=", "!=") and (isinstance(a, (SMat, GUndef)) or isinstance(b, (SMat, GUndef)))):
            if isinstance(a, GUndef) or isinstance(b, GUndef):
                return GBool(False)
            return SBin(op, a, b, pos)
        # scalar comparison (operands coerced to int by the checker)
        if isinstance(a, GUndef) or isinstance(b, GUndef):
            return GBool(False)
        return make_cmp(op, a, b, pos)

    def _quantifier(self, e: Quantifier):
        dom_value = eval_ground(e.domain, self.env, self.budget)
        if dom_value is UNDEF:
            return undef_of(e)
        saved = {n: self.env.get(n, _MISSING) for n in e.names}
        items = []
        try:
            for combo in iter_bindings(e.names, dom_value, self.budget):
                self.env.update(zip(e.names, combo))
                b = self.expand(e.body)
                if e.kind == "forAll" and b == GBool(False):
                    return GBool(False)
                if e.kind == "exists" and b == GBool(True):
                    return GBool(True)
                if e.kind == "sum" and isinstance(b, GUndef):
                    return GUndef("int")
                items.append(b)
        finally:
            _restore(self.env, saved)
        if e.kind == "forAll":
            return make_and(items)
        if e.kind == "exists":
            return make_or(items)
        return self._make_sum(items, (e.line, e.col))

    def _make_sum(self, items, pos):
        items = [it for it in items if not (isinstance(it, GInt) and it.v == 0)]
        if not items:
            return GInt(0)
        if len(items) == 1:
            return items[0]
        return SNary("sum", items, pos)

    def _comprehension(self, e: Comprehension):
        rows: list = []
        names = [n for g in e.generators for n in g.names]
        saved = {n: self.env.get(n, _MISSING) for n in names}
        undefined = False

        def rec(gi: int):
            nonlocal undefined
            if undefined:
                return
            if gi == len(e.generators):
                self.budget.spend()
                for c in e.conditions:
                    if not eval_ground(c, self.env, self.budget):
                        return
                hv = self.expand(e.head)
                if isinstance(hv, GUndef):
                    undefined = True
                    return
                rows.append(hv)
                return
            g = e.generators[gi]
            dom_value = eval_ground(g.domain, self.env, self.budget)
            if dom_value is UNDEF:
                undefined = True
                return
            vals = domain_values(dom_value, self.budget)
            for combo in _cartesian(vals, repeat=len(g.names)):
                self.env.update(zip(g.names, combo))
                rec(gi + 1)
                if undefined:
                    return

        try:
            rec(0)
        finally:
            _restore(self.env, saved)
        if undefined:
            return undef_of(e)
        return self._assemble(rows, e.index_dom, e)

    def _matrix_lit(self, e: MatrixLit):
        rows = [self.expand(el) for el in e.elements]
        if any(isinstance(r, GUndef) for r in rows):
            return undef_of(e)
        return self._assemble(rows, e.index_dom, e)

    def _assemble(self, rows: list, index_dom_expr, e: Node):
        n = len(rows)
        if index_dom_expr is None:
            dom = IntD(normalize_int_domain([(1, n)]))
        else:
            dv = eval_ground(index_dom_expr, self.env, self.budget)
            if dv is UNDEF:
                return undef_of(e)
            dom = index_slice_of(dv, n)
            if dom is None:
                raise EvalError(
                    f"index domain {dv.text()} has cardinality {dv.cardinality()} "
                    f"but the matrix has {n} entries",
                    e.line,
                    e.col,
                )
        if rows and isinstance(rows[0], SMat):
            inner = rows[0].doms
            for r in rows:
                if not isinstance(r, SMat) or r.doms != inner:
                    raise EvalError("matrix rows must share their index domains", e.line, e.col)
            flat = [x for r in rows for x in r.elems]
            return SMat((dom,) + tuple(inner), flat)
        return SMat((dom,), rows)

    def _subscript(self, e: Subscript):
        base = self.expand(e.base)
        slices = [isinstance(it, SliceAll) for it in e.items]
        fixed = [
            None if isinstance(it, SliceAll) else eval_ground(it, self.env, self.budget) for it in e.items
        ]
        if isinstance(base, GUndef) or any(v is UNDEF for v in fixed):
            return undef_of(e)
        if not any(slices):
            p = base.position(tuple(fixed))
            return undef_of(e) if p is None else base.elems[p]
        kept_doms = []
        kept_dims = []
        for d, (ix, is_slice) in enumerate(zip(fixed, slices)):
            if is_slice:
                kept_doms.append(base.doms[d])
                kept_dims.append(d)
            elif base.position1(d, ix) is None:
                return undef_of(e)
        elements = []
        for combo in _cartesian(*(list(domain_enumerate(d)) for d in kept_doms)):
            full = list(fixed)
            for d, v in zip(kept_dims, combo):
                full[d] = v
            elements.append(base.elems[base.position(tuple(full))])
        new_doms = tuple(IntD(normalize_int_domain([(1, d.cardinality())])) for d in kept_doms)
        return SMat(new_doms, elements)

    def _call(self, e: Call):
        name = e.name
        pos = (e.line, e.col)
        if name == "toInt":
            a = self.expand(e.args[0])
            if isinstance(a, GBool):
                return GInt(int(a.v))
            return SToInt(a, pos)
        if name == "flatten":
            m = self.expand(e.args[-1])
            if isinstance(m, GUndef):
                return GUndef("matrix")
            if len(e.args) == 1:
                merge = len(m.doms)
            elif e.args[0].value == 0:
                return m
            else:
                merge = e.args[0].value + 1
            card = 1
            for d in m.doms[:merge]:
                card *= d.cardinality()
            new_first = IntD(normalize_int_domain([(1, card)]))
            return SMat((new_first,) + m.doms[merge:], m.elems)
        if name in ("sum", "product", "min", "max", "and", "or") and len(e.args) == 1:
            m = self.expand(e.args[0])
            if isinstance(m, GUndef):
                return GBool(False) if name in ("and", "or") else GUndef("int")
            if name == "and":
                return make_and(m.elems)
            if name == "or":
                return make_or(m.elems)
            if name == "sum":
                return self._make_sum([self._as_int(x, pos) for x in m.elems], pos)
            if name in ("min", "max") and not m.elems:
                raise EvalError(f"{name} of an empty matrix", e.line, e.col)
            if name == "product" and not m.elems:
                return GInt(1)
            if len(m.elems) == 1:
                return self._as_int(m.elems[0], pos)
            return SNary(name, [self._as_int(x, pos) for x in m.elems], pos)
        if name in ("min", "max"):
            a = self.expand(e.args[0])
            b = self.expand(e.args[1])
            if isinstance(a, GUndef) or isinstance(b, GUndef):
                return GUndef("int")
            return SNary(name, [a, b], pos)
        if name == "allDiff":
            m = self.expand(e.args[0])
            if isinstance(m, GUndef):
                return GBool(False)
            if len(m.elems) < 2:
                return GBool(True)
            return SGlobal("allDiff", [m], pos)
        if name == "alldifferent_except":
            m = self.expand(e.args[0])
            v = eval_ground(e.args[1], self.env, self.budget)
            if isinstance(m, GUndef) or v is UNDEF:
                return GBool(False)
            if len(m.elems) < 2:
                return GBool(True)
            return SGlobal("alldifferent_except", [m, int(v)], pos)
        if name == "gcc":
            xs = self.expand(e.args[0])
            vals = eval_ground(e.args[1], self.env, self.budget)
            counts = self.expand(e.args[2])
            if isinstance(xs, GUndef) or vals is UNDEF or isinstance(counts, GUndef):
                return GBool(False)
            vals_t = tuple(int(x) for x in vals.elements)
            if len(vals_t) != len(counts.elems):
                raise EvalError("gcc needs matching value and count lists", e.line, e.col)
            return SGlobal("gcc", [xs, vals_t, counts], pos)
        if name in ("atleast", "atmost"):
            xs = self.expand(e.args[0])
            counts = eval_ground(e.args[1], self.env, self.budget)
            vals = eval_ground(e.args[2], self.env, self.budget)
            if isinstance(xs, GUndef) or counts is UNDEF or vals is UNDEF:
                return GBool(False)
            counts_t = tuple(int(x) for x in counts.elements)
            vals_t = tuple(int(x) for x in vals.elements)
            if len(vals_t) != len(counts_t):
                raise EvalError(f"{name} needs matching count and value lists", e.line, e.col)
            return SGlobal(name, [xs, counts_t, vals_t], pos)
        if name == "table":
            xs = self.expand(e.args[0])
            rows_v = eval_ground(e.args[1], self.env, self.budget)
            if isinstance(xs, GUndef) or rows_v is UNDEF:
                return GBool(False)
            tuples = []
            for row in rows_v.rows():
                tup = tuple(int(x) for x in row.elements)
                if len(tup) != len(xs.elems):
                    raise EvalError(
                        f"table tuple of length {len(tup)} against a scope of length {len(xs.elems)}",
                        e.line,
                        e.col,
                    )
                tuples.append(tup)
            if not xs.elems:
                return GBool(bool(tuples))
            return SGlobal("table", [xs, tuple(tuples)], pos)
        raise AssertionError(f"cannot expand call {name}")

    def _as_int(self, t, pos):
        """Coerce a bool-typed element to its 0/1 integer form."""
        if isinstance(t, GBool):
            return GInt(int(t.v))
        if is_bool_tree(t):
            return SToInt(t, pos)
        return t


_MISSING = object()


def _restore(env: dict, saved: dict):
    for k, v in saved.items():
        if v is _MISSING:
            env.pop(k, None)
        else:
            env[k] = v


# SMat single-dimension membership helper used by slicing


def _position1(self, d: int, ix) -> int | None:
    vals = list(domain_enumerate(self.doms[d]))
    if isinstance(self.doms[d], BoolD):
        if not isinstance(ix, bool):
            return None
    elif isinstance(ix, bool):
        ix = int(ix)
    return vals.index(ix) if ix in vals else None


SMat.position1 = _position1


# --------------------------------------------------------------------------
# Stage 2: totalization


def totalize(t):
    """Rewrite partial operations into total ones; returns (tree, guards).
    Boolean-typed trees absorb their guards (the closest boolean ancestor
    rule) and always come back with an empty guard list."""
    if isinstance(t, (GInt, GBool, VarRef)):
        return t, []
    if isinstance(t, GUndef):
        return GInt(0), [GBool(False)]
    if isinstance(t, SUn):
        if t.op == "!":
            return make_not(tot_bool(t.a)), []
        a, g = totalize(t.a)
        return SUn(t.op, a, t.pos), g
    if isinstance(t, SToInt):
        return SToInt(tot_bool(t.a), t.pos), []
    if isinstance(t, SAnd):
        return make_and([tot_bool(x) for x in t.items]), []
    if isinstance(t, SOr):
        return make_or([tot_bool(x) for x in t.items]), []
    if isinstance(t, SNary):
        items = []
        guards = []
        for x in t.items:
            xi, gi = totalize(x)
            items.append(xi)
            guards.extend(gi)
        return SNary(t.op, items, t.pos), guards
    if isinstance(t, SMat):
        elems = []
        guards = []
        for x in t.elems:
            if is_bool_tree(x):
                elems.append(tot_bool(x))
                continue
            xi, gi = totalize(x)
            elems.append(xi)
            guards.extend(gi)
        return SMat(t.doms, elems), guards
    if isinstance(t, SGlobal):
        args = []
        guards = []
        for a in t.args:
            if isinstance(a, SMat):
                ai, gi = totalize(a)
                args.append(ai)
                guards.extend(gi)
            else:
                args.append(a)
        return make_and([SGlobal(t.name, args, t.pos)] + guards), []
    if isinstance(t, SBin):
        op = t.op
        if op in _BOOL_OPS:
            a = tot_bool(t.a)
            b = tot_bool(t.b)
            if op == "/\\":
                return make_and([a, b]), []
            if op == "\\/":
                return make_or([a, b]), []
            if op == "->":
                return make_imp(a, b), []
            return make_iff(a, b), []
        if op == "in":
            a, g = totalize(t.a)
            return make_and([SBin("in", a, t.b, t.pos)] + g), []
        if op in _COMPARE_OPS or op in _LEX_OPS:
            a, ga = totalize(t.a)
            b, gb = totalize(t.b)
            return make_and([SBin(op, a, b, t.pos)] + ga + gb), []
        # arithmetic
        a, ga = totalize(t.a)
        b, gb = totalize(t.b)
        guards = ga + gb
        if op in ("/", "%"):
            guards.append(make_cmp("!=", b, GInt(0), t.pos))
        elif op == "**":
            guards.append(make_or([make_cmp("!=", a, GInt(0), t.pos), make_cmp("!=", b, GInt(0), t.pos)]))
            guards.append(make_cmp(">=", b, GInt(0), t.pos))
        return SBin(op, a, b, t.pos), guards
    raise AssertionError(f"cannot totalize {t!r}")


def tot_bool(t):
    x, guards = totalize(t)
    assert not guards, "boolean subtrees absorb their own guards"
    return x


# --------------------------------------------------------------------------
# Stage 3: flattening into catalogue constraints


class _Flattener:
    def __init__(self, csp: FlatCSP):
        self.csp = csp
        self.aux_count = 0
        self.const_vars: dict[int, int] = {}

    # ---- variable helpers

    def aux_var(self, values, pos, is_bool=False) -> int:
        self.aux_count += 1
        name = f"__aux{self.aux_count}_L{pos[0]}C{pos[1]}"
        if not values:
            raise EvalError("auxiliary variable with an empty domain", pos[0], pos[1])
        return self.csp.new_var(name, values, is_bool)

    def const_var(self, k: int) -> int:
        if k not in self.const_vars:
            self.const_vars[k] = self.csp.new_var(f"__c{k}", frozenset([k]))
        return self.const_vars[k]

    def values(self, ix: int) -> frozenset:
        return self.csp.variables[ix].values

    # ---- top-level posting

    def post(self, t):
        if isinstance(t, GBool):
            if not t.v:
                self.csp.trivially_unsat = True
            return
        if isinstance(t, SAnd):
            for x in t.items:
                self.post(x)
            return
        if isinstance(t, SUn):  # '!'
            self.post_neg(t.a)
            return
        if isinstance(t, VarRef):
            self.post_clause([(t.ix, True)])
            return
        if isinstance(t, SOr):
            self.post_clause([self.reify(x) for x in t.items])
            return
        if isinstance(t, SGlobal):
            self.post_global(t)
            return
        if isinstance(t, SBin):
            op = t.op
            if op == "->":
                self.post_clause([_neg(self.reify(t.a)), self.reify(t.b)])
                return
            if op == "<->":
                la = self.reify(t.a)
                lb = self.reify(t.b)
                self.post_clause([_neg(la), lb])
                self.post_clause([la, _neg(lb)])
                return
            if op == "in":
                self._post_in(t, positive=True)
                return
            if op in _LEX_OPS:
                self._post_lex(t.op, t.a, t.b, t.pos)
                return
            if op in ("=", "!=") and isinstance(t.a, SMat):
                self._post_matrix_eq(t)
                return
            if op in _COMPARE_OPS:
                terms, cop, rhs = self._linear_cmp(op, t.a, t.b)
                if terms is None:
                    self.post(GBool(cop))
                    return
                self.csp.post(LinearCon(terms, cop, rhs))
                return
        raise AssertionError(f"cannot post {t!r}")

    def post_neg(self, t):
        if isinstance(t, GBool):
            self.post(GBool(not t.v))
            return
        if isinstance(t, SUn):  # '!'
            self.post(t.a)
            return
        if isinstance(t, VarRef):
            self.post_clause([(t.ix, False)])
            return
        if isinstance(t, SAnd):
            self.post_clause([_neg(self.reify(x)) for x in t.items])
            return
        if isinstance(t, SOr):
            for x in t.items:
                self.post_neg(x)
            return
        if isinstance(t, SGlobal):
            self.post_neg(self.global_formula(t))
            return
        if isinstance(t, SBin):
            op = t.op
            if op == "->":
                self.post(t.a)
                self.post_neg(t.b)
                return
            if op == "<->":
                la = self.reify(t.a)
                lb = self.reify(t.b)
                self.post_clause([la, lb])
                self.post_clause([_neg(la), _neg(lb)])
                return
            if op == "in":
                self._post_in(t, positive=False)
                return
            if op in _LEX_OPS:
                xs, ys, strict = _lex_normal(t.op, t.a, t.b)
                # !(xs <=lex ys) is ys <lex xs; !(xs <lex ys) is ys <=lex xs
                self._post_lex("<lex" if not strict else "<=lex", ys, xs, t.pos)
                return
            if op in ("=", "!=") and isinstance(t.a, SMat):
                flipped = SBin("!=" if op == "=" else "=", t.a, t.b, t.pos)
                self._post_matrix_eq(flipped)
                return
            if op in _COMPARE_OPS:
                self.post(SBin(_NEG_CMP[op], t.a, t.b, t.pos))
                return
        raise AssertionError(f"cannot post negation of {t!r}")

    def post_clause(self, lits):
        out = []
        for l in lits:
            if l is True:
                return
            if l is False:
                continue
            out.append(l)
        if not out:
            self.csp.trivially_unsat = True
            return
        self.csp.post(ClauseCon(tuple(out)))

    # ---- reification: any boolean tree to a literal (or a Python bool)

    def reify(self, t):
        if isinstance(t, GBool):
            return t.v
        if isinstance(t, VarRef):
            return (t.ix, True)
        if isinstance(t, SUn):  # '!'
            return _neg(self.reify(t.a))
        if isinstance(t, SAnd):
            lits = [self.reify(x) for x in t.items]
            if any(l is False for l in lits):
                return False
            lits = [l for l in lits if l is not True]
            if not lits:
                return True
            if len(lits) == 1:
                return lits[0]
            b = self.aux_var((0, 1), _pos_of(t), is_bool=True)
            for l in lits:
                self.post_clause([(b, False), l])
            self.post_clause([(b, True)] + [_neg(l) for l in lits])
            return (b, True)
        if isinstance(t, SOr):
            lits = [self.reify(x) for x in t.items]
            if any(l is True for l in lits):
                return True
            lits = [l for l in lits if l is not False]
            if not lits:
                return False
            if len(lits) == 1:
                return lits[0]
            b = self.aux_var((0, 1), _pos_of(t), is_bool=True)
            for l in lits:
                self.post_clause([(b, True), _neg(l)])
            self.post_clause([(b, False)] + lits)
            return (b, True)
        if isinstance(t, SGlobal):
            return self.reify(self.global_formula(t))
        if isinstance(t, SBin):
            op = t.op
            if op == "->":
                return self.reify(make_or([make_not(t.a), t.b]))
            if op == "<->":
                la = self.reify(t.a)
                lb = self.reify(t.b)
                if la is True:
                    return lb
                if la is False:
                    return _neg(lb)
                if lb is True:
                    return la
                if lb is False:
                    return _neg(la)
                b = self.aux_var((0, 1), t.pos, is_bool=True)
                self.post_clause([(b, False), _neg(la), lb])
                self.post_clause([(b, False), la, _neg(lb)])
                self.post_clause([(b, True), la, lb])
                self.post_clause([(b, True), _neg(la), _neg(lb)])
                return (b, True)
            if op == "in":
                v = self.int_operand(t.a)
                if v[0] == "c":
                    return _in_value(t.b, v[1])
                var = v[1]
                inside = frozenset(x for x in self.values(var) if _in_value(t.b, x))
                if inside == self.values(var):
                    return True
                if not inside:
                    return False
                b = self.aux_var((0, 1), t.pos, is_bool=True)
                self.csp.post(ReifInSet((b, True), var, inside))
                return (b, True)
            if op in _LEX_OPS:
                xs, ys, strict = _lex_normal(op, t.a, t.b)
                return self.reify(self._lex_formula(xs.elems, ys.elems, strict, t.pos))
            if op in ("=", "!=") and isinstance(t.a, SMat):
                return self.reify(self._matrix_eq_formula(t))
            if op in _COMPARE_OPS:
                terms, cop, rhs = self._linear_cmp(op, t.a, t.b)
                if terms is None:
                    return cop
                b = self.aux_var((0, 1), t.pos, is_bool=True)
                self.csp.post(ReifLinear((b, True), terms, cop, rhs))
                return (b, True)
        raise AssertionError(f"cannot reify {t!r}")

    # ---- decompositions

    def global_formula(self, g: SGlobal):
        """A global constraint as a formula of comparisons, used when the
        global appears negated or reified."""
        name = g.name
        if name == "allDiff":
            xs = g.args[0].elems
            return make_and(
                [make_cmp("!=", xs[i], xs[j], g.pos) for i in range(len(xs)) for j in range(i + 1, len(xs))]
            )
        if name == "alldifferent_except":
            xs, val = g.args[0].elems, g.args[1]
            parts = []
            for i in range(len(xs)):
                for j in range(i + 1, len(xs)):
                    parts.append(
                        make_or(
                            [
                                make_cmp("=", xs[i], GInt(val), g.pos),
                                make_cmp("=", xs[j], GInt(val), g.pos),
                                make_cmp("!=", xs[i], xs[j], g.pos),
                            ]
                        )
                    )
            return make_and(parts)
        if name == "gcc":
            xs, vals, counts = g.args[0].elems, g.args[1], g.args[2].elems
            parts = []
            for v, cnt in zip(vals, counts):
                occ = self._occurrence_sum(xs, v, g.pos)
                parts.append(make_cmp("=", occ, cnt, g.pos))
            return make_and(parts)
        if name in ("atleast", "atmost"):
            xs, counts, vals = g.args[0].elems, g.args[1], g.args[2]
            op = ">=" if name == "atleast" else "<="
            parts = []
            for cnt, v in zip(counts, vals):
                occ = self._occurrence_sum(xs, v, g.pos)
                parts.append(make_cmp(op, occ, GInt(cnt), g.pos))
            return make_and(parts)
        if name == "table":
            xs, tuples = g.args[0].elems, g.args[1]
            rows = []
            for tup in tuples:
                rows.append(make_and([make_cmp("=", x, GInt(val), g.pos) for x, val in zip(xs, tup)]))
            return make_or(rows)
        raise AssertionError(name)

    def _occurrence_sum(self, xs, v: int, pos):
        terms = [SToInt(make_cmp("=", x, GInt(v), pos), pos) for x in xs]
        folded = []
        for t in terms:
            if isinstance(t, SToInt) and isinstance(t.a, GBool):
                folded.append(GInt(int(t.a.v)))
            else:
                folded.append(t)
        if not folded:
            return GInt(0)
        if len(folded) == 1:
            return folded[0]
        return SNary("sum", folded, pos)

    def _lex_formula(self, xs, ys, strict, pos):
        def f(i):
            if i == len(xs):
                return GBool((not strict) or i < len(ys))
            if i == len(ys):
                return GBool(False)
            return make_or(
                [
                    make_cmp("<", xs[i], ys[i], pos),
                    make_and([make_cmp("=", xs[i], ys[i], pos), f(i + 1)]),
                ]
            )

        return f(0)

    def _matrix_eq_formula(self, t: SBin):
        a, b = t.a, t.b
        if len(a.elems) != len(b.elems):
            raise EvalError(
                f"matrix equality between different lengths ({len(a.elems)} vs {len(b.elems)})",
                t.pos[0],
                t.pos[1],
            )
        pairs = [
            make_cmp(
                "=" if t.op == "=" else "!=",
                self._int_elem(x, t.pos),
                self._int_elem(y, t.pos),
                t.pos,
            )
            for x, y in zip(a.elems, b.elems)
        ]
        return make_and(pairs) if t.op == "=" else make_or(pairs)

    def _int_elem(self, x, pos):
        if isinstance(x, GBool):
            return GInt(int(x.v))
        if is_bool_tree(x):
            return SToInt(x, pos)
        return x

    def _post_matrix_eq(self, t: SBin):
        formula = self._matrix_eq_formula(t)
        self.post(formula)

    def _post_lex(self, op, a, b, pos):
        xs, ys, strict = _lex_normal(op, a, b)
        if not xs.elems or not ys.elems:
            self.post(self._lex_formula(xs.elems, ys.elems, strict, pos))
            return
        self.csp.post(
            LexCon(
                tuple(self.var_of(x) for x in xs.elems),
                tuple(self.var_of(y) for y in ys.elems),
                strict,
            )
        )

    def _post_in(self, t: SBin, positive: bool):
        v = self.int_operand(t.a)
        if v[0] == "c":
            ok = _in_value(t.b, v[1]) == positive
            self.post(GBool(ok))
            return
        var = self.csp.variables[v[1]]
        if positive:
            kept = frozenset(x for x in var.values if _in_value(t.b, x))
        else:
            kept = frozenset(x for x in var.values if not _in_value(t.b, x))
        var.values = kept
        if not kept:
            self.csp.trivially_unsat = True

    def post_global(self, g: SGlobal):
        name = g.name
        if name == "allDiff":
            self.csp.post(AllDiffCon(tuple(self.var_of(x) for x in g.args[0].elems)))
            return
        if name == "alldifferent_except":
            self.csp.post(
                AllDiffExceptCon(tuple(self.var_of(x) for x in g.args[0].elems), g.args[1])
            )
            return
        if name == "gcc":
            xs = tuple(self.var_of(x) for x in g.args[0].elems)
            counts = tuple(self.var_of(c) for c in g.args[2].elems)
            self.csp.post(GccCon(xs, g.args[1], counts))
            return
        if name == "atleast":
            xs = tuple(self.var_of(x) for x in g.args[0].elems)
            self.csp.post(AtleastCon(xs, g.args[1], g.args[2]))
            return
        if name == "atmost":
            xs = tuple(self.var_of(x) for x in g.args[0].elems)
            self.csp.post(AtmostCon(xs, g.args[1], g.args[2]))
            return
        if name == "table":
            scope = tuple(self.var_of(x) for x in g.args[0].elems)
            tuples = tuple(
                tup
                for tup in g.args[1]
                if all(val in self.values(v) for v, val in zip(scope, tup))
            )
            self.csp.post(TableCon(scope, tuples))
            return
        raise AssertionError(name)

    # ---- integer flattening

    def _linear_cmp(self, op, a, b):
        """Normalize `a op b` into (terms, op', rhs) with op' in =, !=, <=;
        returns (None, truth, None) when it folds to a constant."""
        la, ca = self.linearize(a)
        lb, cb = self.linearize(b)
        d = dict(la)
        for v, c in lb.items():
            d[v] = d.get(v, 0) - c
        d = {v: c for v, c in d.items() if c != 0}
        k = ca - cb  # expression is sum(d) + k  op  0
        if not d:
            truth = _CMP_EVAL[op](k, 0)
            return None, truth, None
        terms = tuple(sorted(((c, v) for v, c in d.items()), key=lambda t: t[1]))
        if op == "=":
            return terms, "=", -k
        if op == "!=":
            return terms, "!=", -k
        if op == "<=":
            return terms, "<=", -k
        if op == "<":
            return terms, "<=", -k - 1
        neg = tuple((-c, v) for c, v in terms)
        if op == ">=":
            return neg, "<=", k
        return neg, "<=", k - 1  # '>'

    def linearize(self, t) -> tuple[dict, int]:
        if isinstance(t, GInt):
            return {}, t.v
        if isinstance(t, VarRef):
            return {t.ix: 1}, 0
        if isinstance(t, SToInt):
            l = self.reify(t.a)
            if l is True:
                return {}, 1
            if l is False:
                return {}, 0
            ix, positive = l
            return ({ix: 1}, 0) if positive else ({ix: -1}, 1)
        if isinstance(t, SUn):
            if t.op == "-":
                d, c = self.linearize(t.a)
                return {v: -k for v, k in d.items()}, -c
            # abs
            x = self.var_of(t.a)
            z = self.aux_var(self._reach_abs(self.values(x)), t.pos)
            self.csp.post(AbsCon(x, z))
            return {z: 1}, 0
        if isinstance(t, SBin):
            op = t.op
            if op == "+" or op == "-":
                da, ca = self.linearize(t.a)
                db, cb = self.linearize(t.b)
                sign = 1 if op == "+" else -1
                d = dict(da)
                for v, c in db.items():
                    d[v] = d.get(v, 0) + sign * c
                return {v: c for v, c in d.items() if c != 0}, ca + sign * cb
            if op == "*":
                da, ca = self.linearize(t.a)
                db, cb = self.linearize(t.b)
                if not da:
                    return {v: c * ca for v, c in db.items() if c * ca != 0}, ca * cb
                if not db:
                    return {v: c * cb for v, c in da.items() if c * cb != 0}, ca * cb
                x = self._collapse(da, ca, t.pos)
                y = self._collapse(db, cb, t.pos)
                z = self.aux_var(self._reach_pair("*", x, y), t.pos)
                self.csp.post(ProductCon(x, y, z))
                return {z: 1}, 0
            if op in ("/", "%", "**"):
                x = self.var_of(t.a)
                y = self.var_of(t.b)
                z = self.aux_var(self._reach_pair(op, x, y), t.pos)
                kind = {"/": DivCon, "%": ModCon, "**": PowCon}[op]
                self.csp.post(kind(x, y, z))
                return {z: 1}, 0
        if isinstance(t, SNary):
            if t.op == "sum":
                d: dict = {}
                c = 0
                for item in t.items:
                    di, ci = self.linearize(item)
                    for v, k in di.items():
                        d[v] = d.get(v, 0) + k
                    c += ci
                return {v: k for v, k in d.items() if k != 0}, c
            if t.op == "product":
                const = 1
                vars_ = []
                for item in t.items:
                    di, ci = self.linearize(item)
                    if not di:
                        const = check_int64(const * ci)
                    else:
                        vars_.append(self._collapse(di, ci, t.pos))
                if not vars_:
                    return {}, const
                acc = vars_[0]
                for nxt in vars_[1:]:
                    z = self.aux_var(self._reach_pair("*", acc, nxt), t.pos)
                    self.csp.post(ProductCon(acc, nxt, z))
                    acc = z
                return {acc: const}, 0
            # min / max
            xs = tuple(self.var_of(x) for x in t.items)
            lo = (min if t.op == "min" else max)(min(self.values(x)) for x in xs)
            hi = (min if t.op == "min" else max)(max(self.values(x)) for x in xs)
            z = self.aux_var(range(lo, hi + 1), t.pos)
            self.csp.post((MinCon if t.op == "min" else MaxCon)(xs, z))
            return {z: 1}, 0
        raise AssertionError(f"cannot linearize {t!r}")

    def int_operand(self, t):
        """('c', k) for a constant, ('v', ix) for a variable."""
        if is_bool_tree(t):
            t = SToInt(t, _pos_of(t))
        d, c = self.linearize(t)
        if not d:
            return ("c", c)
        if len(d) == 1 and c == 0:
            (v, k), = d.items()
            if k == 1:
                return ("v", v)
        return ("v", self._collapse(d, c, _pos_of(t)))

    def var_of(self, t) -> int:
        o = self.int_operand(t)
        return self.const_var(o[1]) if o[0] == "c" else o[1]

    def _collapse(self, d: dict, c: int, pos) -> int:
        """A fresh variable equal to sum(d) + c."""
        if len(d) == 1 and c == 0:
            (v, k), = d.items()
            if k == 1:
                return v
        lo = c
        hi = c
        for v, k in d.items():
            vals = self.values(v)
            lo += min(k * min(vals), k * max(vals))
            hi += max(k * min(vals), k * max(vals))
        z = self.aux_var(self._range_set(lo, hi, pos), pos)
        terms = tuple(sorted([(k, v) for v, k in d.items()] + [(-1, z)], key=lambda t: t[1]))
        self.csp.post(LinearCon(terms, "=", -c))
        return z

    # ---- reachable-domain helpers

    def _range_set(self, lo: int, hi: int, pos) -> frozenset:
        check_int64(lo, pos[0], pos[1])
        check_int64(hi, pos[0], pos[1])
        if hi - lo + 1 > enumeration_cap():
            raise EvalError(
                f"auxiliary variable needs {hi - lo + 1} values, over the enumeration cap",
                pos[0],
                pos[1],
            )
        return frozenset(range(lo, hi + 1))

    def _reach_pair(self, op: str, x: int, y: int) -> frozenset:
        dx = self.values(x)
        dy = self.values(y)
        fn = {"*": lambda a, b: check_int64(a * b), "/": safe_div, "%": safe_mod, "**": safe_pow}[op]
        if len(dx) * len(dy) <= _PAIR_CAP:
            return frozenset(fn(a, b) for a in dx for b in dy)
        ix = (min(dx), max(dx))
        iy = (min(dy), max(dy))
        hull = {"*": interval_mul, "/": interval_div, "%": interval_mod, "**": interval_pow}[op](ix, iy)
        lo, hi = min(hull[0], 0), max(hull[1], 0)  # totalized ops may yield 0
        return self._range_set(lo, hi, (0, 0))

    def _reach_abs(self, dx) -> frozenset:
        if len(dx) <= _SET_CAP:
            return frozenset(abs(v) for v in dx)
        lo, hi = interval_abs((min(dx), max(dx)))
        return self._range_set(lo, hi, (0, 0))


_NEG_CMP = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def _neg(lit):
    if lit is True:
        return False
    if lit is False:
        return True
    return (lit[0], not lit[1])


def _pos_of(t) -> tuple:
    return getattr(t, "pos", (0, 0))


def _lex_normal(op, a, b):
    """Normalize any lex comparison to (xs, ys, strict) meaning xs <=/< lex ys."""
    if op == "<=lex":
        return a, b, False
    if op == "<lex":
        return a, b, True
    if op == ">=lex":
        return b, a, False
    return b, a, True  # '>lex'


def _in_value(dom, x: int) -> bool:
    if isinstance(dom, SetValue):
        return dom.member(x)
    return dom.member(x)


# --------------------------------------------------------------------------
# Model-level driver


def flatten_model(inst: Instance) -> FlatCSP:
    csp = FlatCSP()
    budget = _Budget(enumeration_cap())
    finds: dict[str, object] = {}
    for name, dom in inst.find_domains.items():
        finds[name] = _declare_find(csp, name, dom, budget)
    if any(not v.values for v in csp.variables):
        csp.trivially_unsat = True
    fl = _Flattener(csp)
    exp = _Expander(inst.env, finds, budget)
    branching_entries: list = []
    heuristic: str | None = None
    for st in inst.typed.model.statements:
        # once unsatisfiability is established, a variable domain may be
        # empty, so no further constraint can be flattened (or is needed)
        if isinstance(st, SuchThat):
            for c in st.constraints:
                if csp.trivially_unsat:
                    break
                fl.post(tot_bool(exp.expand(c)))
        elif isinstance(st, Objective):
            if csp.trivially_unsat:
                continue
            t, guards = totalize(exp.expand(st.expr))
            if guards:
                csp.warnings.append(
                    "the objective contains partial operations; their definedness "
                    "conditions were added as constraints"
                )
                for g in guards:
                    fl.post(g)
            csp.objective = (st.sense, fl.var_of(t))
        elif isinstance(st, BranchingOn):
            branching_entries.extend(exp.expand(entry) for entry in st.entries)
        elif isinstance(st, Heuristic):
            heuristic = st.name
    if branching_entries:
        order: list[int] = []
        seen = set()
        for entry in branching_entries:
            for ref in _entry_vars(entry, csp):
                if ref not in seen:
                    seen.add(ref)
                    order.append(ref)
        csp.branching = order
    if heuristic is not None:
        if heuristic in ("conflict", "srf"):
            csp.warnings.append(f"heuristic '{heuristic}' is not implemented; using static order")
            heuristic = "static"
        csp.heuristic = heuristic
    for var in csp.variables:
        if not var.values:
            csp.trivially_unsat = True
    return csp


def _entry_vars(entry, csp: FlatCSP) -> list[int]:
    if isinstance(entry, VarRef):
        return [entry.ix]
    if isinstance(entry, SMat):
        out = []
        for el in entry.elems:
            if isinstance(el, VarRef):
                out.append(el.ix)
            elif not isinstance(el, (GInt, GBool)):
                csp.warnings.append("a branching-on entry mixes in a non-variable expression; it was skipped")
        return out
    if isinstance(entry, (GInt, GBool, GUndef)):
        return []
    csp.warnings.append("a branching-on entry is not a decision variable or matrix; it was skipped")
    return []


def _declare_find(csp: FlatCSP, name: str, dom, budget: _Budget):
    if isinstance(dom, BoolD):
        ix = csp.new_var(name, (0, 1), is_bool=True)
        csp.outputs.append(Output(name, "bool", (ix,)))
        return VarRef(ix, name, frozenset((0, 1)), True)
    if isinstance(dom, IntD):
        values = frozenset(domain_values(dom, budget))
        ix = csp.new_var(name, values)
        csp.outputs.append(Output(name, "int", (ix,)))
        return VarRef(ix, name, values)
    assert isinstance(dom, MatrixD)
    base = dom.base
    is_bool = isinstance(base, BoolD)
    base_values = frozenset((0, 1)) if is_bool else frozenset(domain_values(base, budget))
    dim_values = [domain_values(d, budget) for d in dom.index_doms]
    elems = []
    var_ixs = []
    for combo in _cartesian(*dim_values):
        label = name + "[" + ",".join(_idx_text(v) for v in combo) + "]"
        ix = csp.new_var(label, base_values, is_bool)
        elems.append(VarRef(ix, label, base_values, is_bool))
        var_ixs.append(ix)
    csp.outputs.append(
        Output(name, "matrix", tuple(var_ixs), tuple(dom.index_doms), "bool" if is_bool else "int")
    )
    return SMat(tuple(dom.index_doms), elems)


def _idx_text(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)
