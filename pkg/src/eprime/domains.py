"""Domain and value representations.

IntDomain is a normalized union of inclusive ranges: sorted, disjoint,
non-adjacent, so int(10,1..5,4..9) and int(1..10) have one representation.
Out-of-order ranges like 5..3 are legal and empty. A None endpoint means the
range is open on that side; open domains are only legal for givens and
comprehension index domains, which the type checker enforces.

Values are plain Python ints and bools, plus MatrixVal (flat row-major
elements with explicit index domains) and SetValue (the result of toSet).
UNDEF is the undefined value from the relational semantics: it is a value
that evaluation propagates, never an exception.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import product as _cartesian

from .errors import EvalError

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

DEFAULT_ENUM_CAP = 10**6
ENUM_CAP_ENV_VAR = "EPRIME_ENUM_CAP"


def enumeration_cap() -> int:
    raw = os.environ.get(ENUM_CAP_ENV_VAR)
    if raw is None:
        return DEFAULT_ENUM_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise EvalError(f"{ENUM_CAP_ENV_VAR} must be an integer, got {raw!r}")
    if cap <= 0:
        raise EvalError(f"{ENUM_CAP_ENV_VAR} must be positive, got {cap}")
    return cap


class Undefined:
    """Singleton marker for undefined results (division by zero etc.)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEF"


UNDEF = Undefined()


def check_int64(v: int, line=None, col=None) -> int:
    if v < INT64_MIN or v > INT64_MAX:
        raise EvalError(f"arithmetic overflow: {v} is outside the signed 64-bit range", line, col)
    return v


# --------------------------------------------------------------------------
# Integer domains


@dataclass(frozen=True)
class IntDomain:
    """ranges is a tuple of (lo, hi) with None for an open end."""

    ranges: tuple = ()

    def is_empty(self) -> bool:
        return not self.ranges

    def is_finite(self) -> bool:
        return all(lo is not None and hi is not None for lo, hi in self.ranges)

    def has_lower_bound(self) -> bool:
        return not self.ranges or self.ranges[0][0] is not None

    def member(self, v: int) -> bool:
        for lo, hi in self.ranges:
            if (lo is None or v >= lo) and (hi is None or v <= hi):
                return True
        return False

    def cardinality(self) -> int | None:
        """Number of values, or None when infinite."""
        if not self.is_finite():
            return None
        return sum(hi - lo + 1 for lo, hi in self.ranges)

    def values(self):
        """Ascending iterator; requires a finite domain."""
        if not self.is_finite():
            raise EvalError("cannot enumerate an open integer domain")
        for lo, hi in self.ranges:
            yield from range(lo, hi + 1)

    def values_from_low(self):
        """Ascending iterator for domains with a closed lower bound; used to
        take the first n values of an open-above comprehension index domain."""
        if not self.has_lower_bound():
            raise EvalError("cannot enumerate a domain with no lower bound")
        for lo, hi in self.ranges:
            if hi is None:
                v = lo
                while True:
                    yield v
                    v += 1
            else:
                yield from range(lo, hi + 1)

    def min_value(self) -> int | None:
        return self.ranges[0][0] if self.ranges else None

    def max_value(self) -> int | None:
        return self.ranges[-1][1] if self.ranges else None

    def text(self) -> str:
        if not self.ranges:
            return "int()"
        if self.ranges == ((None, None),):
            return "int"
        items = []
        for lo, hi in self.ranges:
            if lo is None:
                items.append(f"..{hi}")
            elif hi is None:
                items.append(f"{lo}..")
            elif lo == hi:
                items.append(str(lo))
            else:
                items.append(f"{lo}..{hi}")
        return f"int({','.join(items)})"


def _lo_key(lo):
    return float("-inf") if lo is None else lo


def _hi_key(hi):
    return float("inf") if hi is None else hi


def normalize_int_domain(raw_ranges) -> IntDomain:
    """Normalize a list of (lo, hi) pairs (None = open end): drop empties,
    sort, merge overlapping and adjacent ranges."""
    kept = []
    for lo, hi in raw_ranges:
        if lo is not None and hi is not None and lo > hi:
            continue  # out-of-order ranges are legal and denote nothing
        kept.append((lo, hi))
    kept.sort(key=lambda r: (_lo_key(r[0]), _hi_key(r[1])))
    merged: list[tuple] = []
    for lo, hi in kept:
        if merged:
            plo, phi = merged[-1]
            # overlap or adjacency: 1..3 and 4..5 merge into 1..5
            if _lo_key(lo) <= _hi_key(phi) + 1:
                if _hi_key(hi) > _hi_key(phi):
                    merged[-1] = (plo, hi)
                continue
        merged.append((lo, hi))
    return IntDomain(tuple(merged))


def int_domain_union(a: IntDomain, b: IntDomain) -> IntDomain:
    return normalize_int_domain(list(a.ranges) + list(b.ranges))


def int_domain_intersect(a: IntDomain, b: IntDomain) -> IntDomain:
    out = []
    for alo, ahi in a.ranges:
        for blo, bhi in b.ranges:
            lo = alo if _lo_key(alo) >= _lo_key(blo) else blo
            hi = ahi if _hi_key(ahi) <= _hi_key(bhi) else bhi
            if _lo_key(lo) <= _hi_key(hi):
                out.append((lo, hi))
    return normalize_int_domain(out)


def int_domain_minus(a: IntDomain, b: IntDomain) -> IntDomain:
    """Values of a not in b, by subtracting each range of b from the pieces."""
    pieces = list(a.ranges)
    for blo, bhi in b.ranges:
        next_pieces = []
        for lo, hi in pieces:
            # left remainder: values < blo
            if blo is not None and (lo is None or lo < blo):
                left_hi = blo - 1 if hi is None or hi >= blo else hi
                if _lo_key(lo) <= _hi_key(left_hi):
                    next_pieces.append((lo, left_hi))
            # right remainder: values > bhi
            if bhi is not None and (hi is None or hi > bhi):
                right_lo = bhi + 1 if lo is None or lo <= bhi else lo
                if _lo_key(right_lo) <= _hi_key(hi):
                    next_pieces.append((right_lo, hi))
        pieces = next_pieces
    return normalize_int_domain(pieces)


# --------------------------------------------------------------------------
# Domain values (the result of evaluating a domain expression)


@dataclass(frozen=True)
class BoolD:
    """A subset of {false, true}; the full set is the written domain `bool`."""

    members: frozenset = frozenset([False, True])

    def is_full(self) -> bool:
        return len(self.members) == 2

    def member(self, v: bool) -> bool:
        return v in self.members

    def cardinality(self) -> int:
        return len(self.members)

    def values(self):
        # false < true
        if False in self.members:
            yield False
        if True in self.members:
            yield True

    def text(self) -> str:
        if self.is_full():
            return "bool"
        # Partial bool domains have no concrete syntax; they are rejected as
        # index domains, so this only shows up in diagnostics.
        return "bool{" + ",".join("true" if m else "false" for m in sorted(self.members)) + "}"


@dataclass(frozen=True)
class IntD:
    dom: IntDomain = IntDomain()

    def member(self, v: int) -> bool:
        return self.dom.member(v)

    def cardinality(self) -> int | None:
        return self.dom.cardinality()

    def values(self):
        return self.dom.values()

    def text(self) -> str:
        return self.dom.text()


@dataclass(frozen=True)
class MatrixD:
    index_doms: tuple = ()
    base: object = None  # BoolD | IntD

    def cell_count(self) -> int:
        n = 1
        for d in self.index_doms:
            c = d.cardinality()
            if c is None:
                raise EvalError("matrix index domains must be finite")
            n *= c
        return n

    def cardinality(self) -> int | None:
        base_card = self.base.cardinality()
        if base_card is None:
            return None
        return base_card**self.cell_count()

    def text(self) -> str:
        dims = ", ".join(d.text() for d in self.index_doms)
        return f"matrix indexed by [{dims}] of {self.base.text()}"


def domain_binop(op: str, a, b):
    """union / intersect / - on two domain values of the same base type."""
    if isinstance(a, IntD) and isinstance(b, IntD):
        if op == "union":
            return IntD(int_domain_union(a.dom, b.dom))
        if op == "intersect":
            return IntD(int_domain_intersect(a.dom, b.dom))
        if op == "-":
            return IntD(int_domain_minus(a.dom, b.dom))
    if isinstance(a, BoolD) and isinstance(b, BoolD):
        if op == "union":
            return BoolD(a.members | b.members)
        if op == "intersect":
            return BoolD(a.members & b.members)
        if op == "-":
            return BoolD(a.members - b.members)
    raise EvalError(f"domain operator {op!r} not defined between {a.text()} and {b.text()}")


def domain_cardinality(dom) -> int | None:
    return dom.cardinality()


def domain_enumerate(dom, cap: int | None = None):
    """Yield every value of the domain in canonical order: ints ascending,
    false before true, matrix values in lexicographic order of their element
    sequence. Matrix domains respect the enumeration cap."""
    if isinstance(dom, (BoolD, IntD)):
        yield from dom.values()
        return
    if isinstance(dom, MatrixD):
        if cap is None:
            cap = enumeration_cap()
        base_vals = list(domain_enumerate(dom.base))
        cells = dom.cell_count()
        count = 0
        for combo in _cartesian(base_vals, repeat=cells):
            count += 1
            if count > cap:
                raise EvalError(
                    f"matrix domain enumeration exceeds the cap of {cap} values "
                    f"(set {ENUM_CAP_ENV_VAR} to raise it)"
                )
            yield MatrixVal(dom.index_doms, combo)
        return
    raise EvalError(f"cannot enumerate {dom!r}")


def value_in_domain(v, dom) -> bool:
    if isinstance(dom, BoolD):
        return isinstance(v, bool) and dom.member(v)
    if isinstance(dom, IntD):
        return isinstance(v, int) and not isinstance(v, bool) and dom.member(v)
    if isinstance(dom, MatrixD):
        if not isinstance(v, MatrixVal):
            return False
        if tuple(v.index_doms) != tuple(dom.index_doms):
            return False
        return all(value_in_domain(e, dom.base) for e in v.elements)
    raise EvalError(f"cannot test membership in {dom!r}")


# --------------------------------------------------------------------------
# Values


@dataclass(frozen=True)
class MatrixVal:
    """index_doms: one finite BoolD/IntD per dimension; elements flat, row-major."""

    index_doms: tuple = ()
    elements: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "index_doms", tuple(self.index_doms))
        object.__setattr__(self, "elements", tuple(self.elements))

    def ndim(self) -> int:
        return len(self.index_doms)

    def dim_values(self, d: int) -> list:
        return list(domain_enumerate(self.index_doms[d]))

    def position(self, indices) -> int | None:
        """Flat position for an index tuple, or None when out of bounds."""
        if len(indices) != self.ndim():
            raise EvalError(f"matrix of {self.ndim()} dimensions indexed with {len(indices)} indices")
        pos = 0
        for d, ix in enumerate(indices):
            vals = self.dim_values(d)
            try:
                k = vals.index(ix)
            except ValueError:
                return None
            pos = pos * len(vals) + k
        return pos

    def get(self, indices):
        pos = self.position(indices)
        if pos is None:
            return UNDEF
        return self.elements[pos]

    def rows(self):
        """Split the first dimension: yields elements (ndim 1) or sub-matrices."""
        n_first = self.index_doms[0].cardinality()
        if self.ndim() == 1:
            yield from self.elements
            return
        if n_first == 0:
            return
        stride = len(self.elements) // n_first
        rest = self.index_doms[1:]
        for r in range(n_first):
            yield MatrixVal(rest, self.elements[r * stride : (r + 1) * stride])


@dataclass(frozen=True)
class SetValue:
    """Result of toSet: an ordered duplicate-free collection, usable only as
    the right operand of `in` and in equality tests."""

    values: tuple = ()

    def member(self, v) -> bool:
        return v in self.values


def value_text(v) -> str:
    """Print a value as a parseable literal (matrices carry explicit index
    domains so solutions round-trip through the parameter parser)."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, MatrixVal):
        if v.ndim() == 0:
            raise EvalError("zero-dimensional matrix value")
        inner = ", ".join(value_text(r) for r in v.rows())
        return f"[{inner} ; {v.index_doms[0].text()}]"
    if isinstance(v, SetValue):
        return "toSet([" + ", ".join(value_text(x) for x in v.values) + "])"
    if v is UNDEF:
        return "UNDEF"
    raise EvalError(f"unprintable value {v!r}")


# --------------------------------------------------------------------------
# Interval arithmetic on (lo, hi) pairs of ints. All operations are over the
# totalized semantics (division by zero yields 0 and so on), which is what
# sizing auxiliary solver variables needs.


def interval_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def interval_sub(a, b):
    return (a[0] - b[1], a[1] - b[0])


def interval_neg(a):
    return (-a[1], -a[0])


def interval_mul(a, b):
    corners = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return (min(corners), max(corners))


def interval_abs(a):
    lo, hi = a
    if lo >= 0:
        return (lo, hi)
    if hi <= 0:
        return (-hi, -lo)
    return (0, max(-lo, hi))


def safe_div(x: int, y: int) -> int:
    """Totalized floor division: x/0 = 0."""
    if y == 0:
        return 0
    return x // y


def safe_mod(x: int, y: int) -> int:
    """Totalized floor modulo (result has the sign of y): x%0 = 0."""
    if y == 0:
        return 0
    return x - y * (x // y)


def safe_pow(x: int, y: int) -> int:
    """Totalized power: negative exponents and 0**0 yield 0. Computed by
    repeated multiplication with an overflow check at every step."""
    if y < 0 or (x == 0 and y == 0):
        return 0
    if x == 0:
        return 0 if y > 0 else 1
    if x == 1:
        return 1
    if x == -1:
        return -1 if y % 2 else 1
    # |x| >= 2: bail out early when the result cannot fit 64 bits
    if y > 63:
        raise EvalError(f"arithmetic overflow: {x}**{y} is outside the signed 64-bit range")
    result = 1
    for _ in range(y):
        result *= x
        check_int64(result)
    return result


def interval_div(a, b):
    candidates = [0] if b[0] <= 0 <= b[1] else []
    ys = {b[0], b[1], -1, 1}
    for y in ys:
        if y == 0 or y < b[0] or y > b[1]:
            continue
        for x in (a[0], a[1]):
            candidates.append(x // y)
    if not candidates:
        candidates = [0]
    return (min(candidates), max(candidates))


def interval_mod(a, b):
    lo, hi = 0, 0
    if b[1] > 0:
        hi = max(hi, b[1] - 1)
    if b[0] < 0:
        lo = min(lo, b[0] + 1)
    return (lo, hi)


def interval_pow(a, b):
    """Sound hull of safe_pow over the box; raises on 64-bit overflow, since
    such an assignment would be a hard error anyway."""
    xs = {a[0], a[1]}
    for probe in (-2, -1, 0, 1, 2):
        if a[0] <= probe <= a[1]:
            xs.add(probe)
    ys = {b[0], b[1]}
    for probe in (b[0] + 1, b[1] - 1, 0, 1):
        if b[0] <= probe <= b[1]:
            ys.add(probe)
    vals = []
    for x in xs:
        for y in ys:
            vals.append(safe_pow(x, y))
            # parity flip can change the sign extreme for negative bases
            if x < 0 and y + 1 >= b[0] and y + 1 <= b[1]:
                vals.append(safe_pow(x, y + 1))
    return (min(vals), max(vals))


def interval_min(a, b):
    return (min(a[0], b[0]), min(a[1], b[1]))


def interval_max(a, b):
    return (max(a[0], b[0]), max(a[1], b[1]))


def interval_union(a, b):
    return (min(a[0], b[0]), max(a[1], b[1]))
