"""Parameter binding and ground evaluation.

eval_ground is the reference interpreter for expressions with no decision
variables, under the relational semantics of undefinedness: a partial
operation applied outside its domain (division by zero, negative exponents,
0**0, factorial of a negative, out-of-bounds indexing or slicing) yields the
value UNDEF. UNDEF propagates upward through integer-, matrix-, and
domain-typed nodes and turns into `false` at the closest boolean-typed node,
so boolean evaluation never sees UNDEF. 64-bit overflow, enumerating an open
domain, and cardinality mismatches are hard errors, not UNDEF.

Evaluation order is part of the contract: within one node every operand is
evaluated in full, left to right (so a hard error anywhere in an operand
surfaces even when a sibling is undefined), and only then do the
undefinedness rules apply. Enumeration constructs are the exception: forAll
stops at the first false instance, exists at the first true one, and sum,
and, or, and comprehensions stop at the first undefined instance.

bind_parameters marries a checked model with a checked parameter file:
parameter lettings are evaluated in file order (each may use earlier ones),
then the model's statements are processed in source order; every given must
receive a value inside its instantiated domain (matrix values must match the
declared index domains exactly), every parameter binding must match a given,
where conditions must hold, and find domains must be finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as _cartesian

from .ast_nodes import (
    BinOp,
    BoolLit,
    Call,
    Comprehension,
    DomainBoolAtom,
    DomainIntAtom,
    DomainMatrix,
    Find,
    Given,
    Ident,
    IntLit,
    LettingDomain,
    LettingValue,
    MatrixLit,
    Node,
    Quantifier,
    SliceAll,
    Subscript,
    UnaryOp,
    Where,
    to_text,
)
from .domains import (
    UNDEF,
    BoolD,
    IntD,
    IntDomain,
    MatrixD,
    MatrixVal,
    SetValue,
    check_int64,
    domain_binop,
    domain_enumerate,
    enumeration_cap,
    normalize_int_domain,
    value_in_domain,
    value_text,
)
from .errors import EvalError, InstanceError
from .typecheck import T_BOOL, TypedModel


class _Budget:
    """Counts enumerated bindings so runaway quantifications fail fast."""

    def __init__(self, cap: int):
        self.cap = cap
        self.used = 0

    def spend(self, n: int = 1):
        self.used += n
        if self.used > self.cap:
            raise EvalError(
                f"expression enumerates more than {self.cap} bindings "
                f"(set EPRIME_ENUM_CAP to raise the cap)"
            )


def eval_ground(e: Node, env: dict, budget: _Budget | None = None):
    """Evaluate a type-checked, decision-free expression to a value: int,
    bool, MatrixVal, SetValue, a domain value (IntD/BoolD/MatrixD), or UNDEF.
    Boolean-typed expressions never evaluate to UNDEF."""
    if budget is None:
        budget = _Budget(enumeration_cap())
    return _Eval(env, budget).eval(e)


def domain_values(dom_value, budget: _Budget) -> list:
    """Enumerated values of a domain value, with a cardinality pre-check
    against the budget cap (open domains raise)."""
    card = dom_value.cardinality()
    if card is not None and card > budget.cap:
        raise EvalError(
            f"domain holds {card} values, over the enumeration cap of {budget.cap} "
            f"(set EPRIME_ENUM_CAP to raise it)"
        )
    return list(domain_enumerate(dom_value))


def iter_bindings(names: list[str], dom_value, budget: _Budget):
    """All assignments of the names to values of one shared domain, in
    lexicographic order (first name most significant)."""
    vals = domain_values(dom_value, budget)
    for combo in _cartesian(vals, repeat=len(names)):
        budget.spend()
        yield combo


def index_slice_of(dv, n: int):
    """The index domain actually used for n entries: dv itself when its
    cardinality is exactly n, its first n values when it is open above,
    None when the cardinalities cannot match."""
    if isinstance(dv, BoolD):
        return dv if dv.cardinality() == n else None
    card = dv.cardinality()
    if card is not None:
        return dv if card == n else None
    taken = []
    for v in dv.dom.values_from_low():
        taken.append(v)
        if len(taken) == n:
            break
    if len(taken) < n:
        return None
    return IntD(normalize_int_domain([(v, v) for v in taken]))


class _Eval:
    def __init__(self, env: dict, budget: _Budget):
        self.env = dict(env)
        self.budget = budget

    def undef(self, e: Node):
        """UNDEF converted to false at boolean-typed nodes."""
        return False if e.etype == T_BOOL else UNDEF

    def eval(self, e: Node):
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, Ident):
            return self.env[e.name]
        if isinstance(e, UnaryOp):
            return self._unary(e)
        if isinstance(e, BinOp):
            return self._binop(e)
        if isinstance(e, Quantifier):
            return self._quantifier(e)
        if isinstance(e, MatrixLit):
            return self._matrix_lit(e)
        if isinstance(e, Comprehension):
            return self._comprehension(e)
        if isinstance(e, Subscript):
            return self._subscript(e)
        if isinstance(e, Call):
            return self._call(e)
        if isinstance(e, DomainIntAtom):
            return self._int_domain(e)
        if isinstance(e, DomainBoolAtom):
            return BoolD()
        if isinstance(e, DomainMatrix):
            return self._matrix_domain(e)
        raise AssertionError(f"cannot evaluate {e!r}")

    # -- scalar operators ----------------------------------------------------

    def _unary(self, e: UnaryOp):
        v = self.eval(e.operand)
        if e.op == "!":
            return not v
        if v is UNDEF:
            return self.undef(e)
        if e.op == "-":
            return check_int64(-v, e.line, e.col)
        return check_int64(abs(v), e.line, e.col)  # abs

    def _binop(self, e: BinOp):
        op = e.op
        if op in ("/\\", "\\/", "->", "<->"):
            a = self.eval(e.left)
            b = self.eval(e.right)
            if op == "/\\":
                return a and b
            if op == "\\/":
                return a or b
            if op == "->":
                return (not a) or b
            return a == b
        a = self.eval(e.left)
        if op in ("union", "intersect") or (op == "-" and isinstance(a, (IntD, BoolD))):
            b = self.eval(e.right)
            if a is UNDEF or b is UNDEF:
                return self.undef(e)
            return domain_binop(op, a, b)
        b = self.eval(e.right)
        if op in ("+", "-", "*", "/", "%", "**"):
            if a is UNDEF or b is UNDEF:
                return self.undef(e)
            if op == "+":
                return check_int64(a + b, e.line, e.col)
            if op == "-":
                return check_int64(a - b, e.line, e.col)
            if op == "*":
                return check_int64(a * b, e.line, e.col)
            if op == "/":
                return a // b if b != 0 else self.undef(e)
            if op == "%":
                return a % b if b != 0 else self.undef(e)
            # ** defined iff (x != 0 \/ y != 0) /\ y >= 0
            if b < 0 or (a == 0 and b == 0):
                return self.undef(e)
            return _pow64(a, b, e)
        if op == "in":
            if a is UNDEF or b is UNDEF:
                return False
            if isinstance(b, SetValue):
                return b.member(int(a))
            if isinstance(b, (IntD, BoolD)):
                return b.member(a)
            raise AssertionError(f"bad `in` right operand {b!r}")
        if op in ("<", "<=", ">", ">="):
            if a is UNDEF or b is UNDEF:
                return False
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            return a >= b
        if op in ("<=lex", "<lex", ">=lex", ">lex"):
            if a is UNDEF or b is UNDEF:
                return False
            xs = [int(v) for v in a.elements]
            ys = [int(v) for v in b.elements]
            if op == "<=lex":
                return xs <= ys
            if op == "<lex":
                return xs < ys
            if op == ">=lex":
                return xs >= ys
            return xs > ys
        # = != on scalars, matrices, or sets
        if a is UNDEF or b is UNDEF:
            return False
        eq = self._values_equal(a, b, e)
        return eq if op == "=" else not eq

    def _values_equal(self, a, b, e: Node) -> bool:
        if isinstance(a, MatrixVal) and isinstance(b, MatrixVal):
            if len(a.elements) != len(b.elements):
                raise EvalError(
                    f"matrix equality between different lengths ({len(a.elements)} vs {len(b.elements)})",
                    e.line,
                    e.col,
                )
            return all(int(x) == int(y) for x, y in zip(a.elements, b.elements))
        if isinstance(a, SetValue) and isinstance(b, SetValue):
            return a.values == b.values
        return int(a) == int(b)

    # -- quantifiers and comprehensions --------------------------------------

    def _domain_values(self, dom_value) -> list:
        return domain_values(dom_value, self.budget)

    def _bindings(self, names: list[str], dom_value):
        return iter_bindings(names, dom_value, self.budget)

    def _quantifier(self, e: Quantifier):
        dom_value = self.eval(e.domain)
        if dom_value is UNDEF:
            return self.undef(e)
        saved = {n: self.env.get(n, _MISSING) for n in e.names}
        try:
            if e.kind == "sum":
                total = 0
                for combo in self._bindings(e.names, dom_value):
                    self.env.update(zip(e.names, combo))
                    v = self.eval(e.body)
                    if v is UNDEF:
                        return self.undef(e)
                    total = check_int64(total + v, e.line, e.col)
                return total
            result = e.kind == "forAll"
            for combo in self._bindings(e.names, dom_value):
                self.env.update(zip(e.names, combo))
                v = self.eval(e.body)
                if e.kind == "forAll" and not v:
                    return False
                if e.kind == "exists" and v:
                    return True
            return result
        finally:
            _restore(self.env, saved)

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
                    if not self.eval(c):
                        return
                hv = self.eval(e.head)
                if hv is UNDEF:
                    undefined = True
                    return
                rows.append(hv)
                return
            g = e.generators[gi]
            dom_value = self.eval(g.domain)
            if dom_value is UNDEF:
                undefined = True
                return
            vals = self._domain_values(dom_value)
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
            return self.undef(e)
        return self._build_matrix(rows, e.index_dom, e)

    # -- matrices ------------------------------------------------------------

    def _matrix_lit(self, e: MatrixLit):
        rows = [self.eval(el) for el in e.elements]
        if any(v is UNDEF for v in rows):
            return self.undef(e)
        return self._build_matrix(rows, e.index_dom, e)

    def _build_matrix(self, rows: list, index_dom_expr, e: Node):
        """Assemble a MatrixVal from evaluated row values plus an optional
        explicit index domain (closed: cardinality must match; open above:
        the first len(rows) values are taken)."""
        n = len(rows)
        if index_dom_expr is None:
            dom = IntD(normalize_int_domain([(1, n)]))
        else:
            dv = self.eval(index_dom_expr)
            if dv is UNDEF:
                return self.undef(e)
            dom = self._index_slice_of(dv, n, e)
            if dom is None:
                raise EvalError(
                    f"index domain {dv.text()} has cardinality {dv.cardinality()} "
                    f"but the matrix has {n} entries",
                    e.line,
                    e.col,
                )
        if rows and isinstance(rows[0], MatrixVal):
            inner = rows[0].index_doms
            for r in rows:
                if not isinstance(r, MatrixVal) or r.index_doms != inner:
                    raise EvalError("matrix rows must share their index domains", e.line, e.col)
            flat = tuple(x for r in rows for x in r.elements)
            return MatrixVal((dom,) + tuple(inner), flat)
        return MatrixVal((dom,), tuple(rows))

    def _index_slice_of(self, dv, n: int, e: Node):
        return index_slice_of(dv, n)

    def _subscript(self, e: Subscript):
        base = self.eval(e.base)
        slices = [isinstance(it, SliceAll) for it in e.items]
        fixed = [None if isinstance(it, SliceAll) else self.eval(it) for it in e.items]
        if base is UNDEF or any(v is UNDEF for v in fixed):
            return self.undef(e)
        if not any(slices):
            v = base.get(tuple(fixed))
            return self.undef(e) if v is UNDEF else v
        # slicing: every fixed position must lie inside its index domain;
        # kept dimensions are reindexed contiguously from 1
        kept_doms = []
        kept_dims = []
        for d, (ix, is_slice) in enumerate(zip(fixed, slices)):
            if is_slice:
                kept_doms.append(base.index_doms[d])
                kept_dims.append(d)
            elif not _index_member(base.index_doms[d], ix):
                return self.undef(e)
        elements = []
        for combo in _cartesian(*(list(domain_enumerate(d)) for d in kept_doms)):
            full = list(fixed)
            for d, v in zip(kept_dims, combo):
                full[d] = v
            elements.append(base.elements[base.position(tuple(full))])
        new_doms = tuple(IntD(normalize_int_domain([(1, d.cardinality())])) for d in kept_doms)
        return MatrixVal(new_doms, tuple(elements))

    # -- functions -----------------------------------------------------------

    def _call(self, e: Call):
        args = [self.eval(a) for a in e.args]
        if any(v is UNDEF for v in args):
            return self.undef(e)
        name = e.name
        if name == "toInt":
            return int(args[0])
        if name == "toSet":
            return SetValue(tuple(sorted({int(v) for v in args[0].elements})))
        if name in ("min", "max"):
            pick = min if name == "min" else max
            if len(args) == 2:
                return pick(args[0], args[1])
            elems = [int(v) for v in args[0].elements]
            if not elems:
                raise EvalError(f"{name} of an empty matrix", e.line, e.col)
            return pick(elems)
        if name == "sum":
            total = 0
            for v in args[0].elements:
                total = check_int64(total + int(v), e.line, e.col)
            return total
        if name == "product":
            total = 1
            for v in args[0].elements:
                total = check_int64(total * int(v), e.line, e.col)
            return total
        if name == "and":
            return all(args[0].elements)
        if name == "or":
            return any(args[0].elements)
        if name == "flatten":
            m = args[-1]
            if len(args) == 1:
                return _flatten_value(m, m.ndim())
            if args[0] == 0:
                return m  # flatten(0, X) is X unchanged
            return _flatten_value(m, args[0] + 1)
        if name == "factorial":
            x = args[0]
            if x < 0:
                return self.undef(e)
            if x > 20:
                raise EvalError(f"arithmetic overflow: factorial({x}) is outside the signed 64-bit range", e.line, e.col)
            return math.factorial(x)
        if name == "popcount":
            return bin(args[0] & 0xFFFFFFFFFFFFFFFF).count("1")
        if name == "allDiff":
            xs = [int(v) for v in args[0].elements]
            return len(set(xs)) == len(xs)
        if name == "alldifferent_except":
            xs = [int(v) for v in args[0].elements if int(v) != args[1]]
            return len(set(xs)) == len(xs)
        if name == "gcc":
            xs = [int(v) for v in args[0].elements]
            vals = [int(v) for v in args[1].elements]
            counts = [int(v) for v in args[2].elements]
            if len(vals) != len(counts):
                raise EvalError("gcc needs matching value and count lists", e.line, e.col)
            return all(xs.count(v) == c for v, c in zip(vals, counts))
        if name in ("atleast", "atmost"):
            xs = [int(v) for v in args[0].elements]
            counts = [int(v) for v in args[1].elements]
            vals = [int(v) for v in args[2].elements]
            if len(vals) != len(counts):
                raise EvalError(f"{name} needs matching count and value lists", e.line, e.col)
            if name == "atleast":
                return all(xs.count(v) >= c for v, c in zip(vals, counts))
            return all(xs.count(v) <= c for v, c in zip(vals, counts))
        if name == "table":
            xs = tuple(int(v) for v in args[0].elements)
            allowed = []
            for row in args[1].rows():
                tup = tuple(int(v) for v in row.elements)
                if len(tup) != len(xs):
                    raise EvalError(
                        f"table tuple of length {len(tup)} against a scope of length {len(xs)}",
                        e.line,
                        e.col,
                    )
                allowed.append(tup)
            return xs in allowed
        raise AssertionError(f"unknown function {name}")

    # -- domains -------------------------------------------------------------

    def _int_domain(self, e: DomainIntAtom):
        if e.items is None:
            return IntD(IntDomain(((None, None),)))
        ranges = []
        undefined = False
        for item in e.items:
            lo = hi = None
            if item.lo is not None:
                lo = self.eval(item.lo)
                undefined = undefined or lo is UNDEF
            if item.hi is not None:
                hi = self.eval(item.hi)
                undefined = undefined or hi is UNDEF
            if not item.is_range:
                hi = lo
            ranges.append((lo, hi))
        if undefined:
            return self.undef(e)
        return IntD(normalize_int_domain(ranges))

    def _matrix_domain(self, e: DomainMatrix):
        doms = [self.eval(d) for d in e.index_doms]
        base = self.eval(e.base)
        if base is UNDEF or any(d is UNDEF for d in doms):
            return self.undef(e)
        return MatrixD(tuple(doms), base)


_MISSING = object()


def _restore(env: dict, saved: dict):
    for k, v in saved.items():
        if v is _MISSING:
            env.pop(k, None)
        else:
            env[k] = v


def _index_member(dom, ix) -> bool:
    if isinstance(dom, BoolD):
        return isinstance(ix, bool) and dom.member(ix)
    return dom.member(int(ix))


def _pow64(x: int, y: int, e: Node) -> int:
    """x**y for y >= 0 with an overflow check at every step."""
    if x in (0, 1) or (x == -1):
        return x**y if y % 2 or x >= 0 else 1
    if y > 63:
        raise EvalError(f"arithmetic overflow: {x}**{y} is outside the signed 64-bit range", e.line, e.col)
    result = 1
    for _ in range(y):
        result = check_int64(result * x, e.line, e.col)
    return result


def _flatten_value(m: MatrixVal, merge: int) -> MatrixVal:
    """Merge the first `merge` dimensions into one indexed from 1; the flat
    row-major element order is unchanged."""
    merged_card = 1
    for d in m.index_doms[:merge]:
        merged_card *= d.cardinality()
    new_first = IntD(normalize_int_domain([(1, merged_card)]))
    return MatrixVal((new_first,) + tuple(m.index_doms[merge:]), m.elements)


# --------------------------------------------------------------------------
# Parameter binding


@dataclass
class Instance:
    """A model with all parameters resolved: env maps every declared
    non-decision name to its value, find_domains maps each decision variable
    to its concrete domain in declaration order."""

    typed: TypedModel
    env: dict = field(default_factory=dict)
    find_domains: dict = field(default_factory=dict)


def bind_parameters(typed: TypedModel, typed_params: TypedModel | None = None) -> Instance:
    param_env: dict = {}
    if typed_params is not None:
        for s in typed_params.model.statements:
            if isinstance(s, LettingValue):
                param_env[s.name] = _letting_value(s, param_env)

    env: dict = {}
    find_domains: dict = {}
    used = set()
    for s in typed.model.statements:
        if isinstance(s, Given):
            dom = _domain_value(s.domain, env)
            for name in s.names:
                if name not in param_env:
                    raise InstanceError(f"no value given for parameter {name!r}", s.line, s.col)
                v = param_env[name]
                used.add(name)
                if not value_in_domain(v, dom):
                    raise InstanceError(
                        f"value {value_text(v)} for given {name!r} is not in {dom.text()} "
                        f"(matrix index domains must match exactly)",
                        s.line,
                        s.col,
                    )
                env[name] = v
        elif isinstance(s, LettingValue):
            env[s.name] = _letting_value(s, env)
        elif isinstance(s, LettingDomain):
            env[s.name] = _domain_value(s.domain, env)
        elif isinstance(s, Find):
            dom = _domain_value(s.domain, env)
            _require_finite(dom, s)
            for name in s.names:
                find_domains[name] = dom
        elif isinstance(s, Where):
            if eval_ground(s.condition, env) is not True:
                raise InstanceError(f"where condition failed: {to_text(s.condition)}", s.line, s.col)

    extra = sorted(set(param_env) - used)
    if extra:
        raise InstanceError(f"parameter bindings {', '.join(map(repr, extra))} do not match any given")
    return Instance(typed, env, find_domains)


def _letting_value(s: LettingValue, env: dict):
    v = eval_ground(s.value, env)
    if s.domain is None:
        return v
    dom = _domain_value(s.domain, env)
    if isinstance(dom, MatrixD) and isinstance(v, MatrixVal):
        return _reindex(v, dom, s)
    if v is UNDEF or not value_in_domain(v, dom):
        raise InstanceError(
            f"letting {s.name!r}: value {value_text(v)} is not in {dom.text()}", s.line, s.col
        )
    return v


def _reindex(v: MatrixVal, dom: MatrixD, s: LettingValue) -> MatrixVal:
    """A letting's declared index domains replace the value's own, dimension
    by dimension; only the cardinalities must agree."""
    for d, (have, want) in enumerate(zip(v.index_doms, dom.index_doms)):
        if have.cardinality() != want.cardinality():
            raise InstanceError(
                f"letting {s.name!r}: dimension {d + 1} has {have.cardinality()} entries "
                f"but the declared index domain {want.text()} holds {want.cardinality()}",
                s.line,
                s.col,
            )
    for x in v.elements:
        if not value_in_domain(x, dom.base):
            raise InstanceError(
                f"letting {s.name!r}: entry {value_text(x)} is not in {dom.base.text()}", s.line, s.col
            )
    return MatrixVal(tuple(dom.index_doms), v.elements)


def _domain_value(d: Node, env: dict):
    v = eval_ground(d, env)
    if v is UNDEF:
        raise InstanceError(f"domain {to_text(d)} is undefined", d.line, d.col)
    return v


def _require_finite(dom, s: Find):
    try:
        card = dom.cardinality()
    except EvalError:
        card = None
    if card is None:
        names = ", ".join(s.names)
        raise InstanceError(f"find {names}: domain must be finite, got {dom.text()}", s.line, s.col)
