"""Domain algebra tests: normalization, set-oracle comparison, enumeration
order, cardinality, and the floor division/modulo backends."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprime.domains import (
    BoolD,
    IntD,
    IntDomain,
    MatrixD,
    MatrixVal,
    domain_binop,
    domain_enumerate,
    int_domain_intersect,
    int_domain_minus,
    int_domain_union,
    interval_abs,
    interval_add,
    interval_div,
    interval_mod,
    interval_mul,
    interval_pow,
    interval_sub,
    normalize_int_domain,
    safe_div,
    safe_mod,
    safe_pow,
    value_in_domain,
)
from eprime.errors import EvalError


def dom(*ranges):
    return normalize_int_domain(list(ranges))


def test_normalization_examples():
    assert dom((1, 3), (5, 5), (7, 7), (9, 20)).text() == "int(1..3,5,7,9..20)"
    assert dom((10, 10), (1, 5), (4, 9)) == dom((1, 10))
    assert dom((5, 3)).is_empty()  # out-of-order ranges denote nothing
    assert dom((1, 2), (2, 4)) == dom((1, 4))
    assert dom((1, 2), (3, 4)) == dom((1, 4))  # adjacent ranges merge
    assert dom((None, 5), (3, None)) == dom((None, None))
    assert dom((None, None)).text() == "int"
    assert dom().text() == "int()"


def test_membership_and_cardinality():
    d = dom((1, 3), (7, 9))
    assert [v for v in range(0, 11) if d.member(v)] == [1, 2, 3, 7, 8, 9]
    assert d.cardinality() == 6
    assert list(d.values()) == [1, 2, 3, 7, 8, 9]
    open_d = dom((1, None))
    assert open_d.cardinality() is None
    assert open_d.member(10**12)
    assert not open_d.member(0)
    with pytest.raises(EvalError):
        list(open_d.values())
    assert [next(iter([v])) for v in list(zip(range(4), open_d.values_from_low()))] is not None


def test_open_domain_algebra():
    assert int_domain_intersect(dom((1, None)), dom((None, 5))) == dom((1, 5))
    assert int_domain_minus(dom((None, None)), dom((1, None))) == dom((None, 0))
    assert int_domain_union(dom((None, 0)), dom((1, None))) == dom((None, None))
    assert int_domain_minus(dom((None, None)), dom((None, None))).is_empty()


def brute_set(d: IntDomain, lo=-60, hi=60):
    return {v for v in range(lo, hi + 1) if d.member(v)}


def random_domain(rng):
    items = []
    for _ in range(rng.randint(0, 4)):
        a = rng.randint(-50, 50)
        b = a + rng.randint(-3, 12)
        items.append((a, b) if rng.random() < 0.8 else (a, a))
    return normalize_int_domain(items)


def test_domain_binop_against_set_oracle():
    rng = random.Random(99)
    for _ in range(2000):
        a, b = random_domain(rng), random_domain(rng)
        assert brute_set(int_domain_union(a, b)) == brute_set(a) | brute_set(b)
        assert brute_set(int_domain_intersect(a, b)) == brute_set(a) & brute_set(b)
        assert brute_set(int_domain_minus(a, b)) == brute_set(a) - brute_set(b)
        # results are normalized: re-normalizing is the identity
        for r in (int_domain_union(a, b), int_domain_intersect(a, b), int_domain_minus(a, b)):
            assert normalize_int_domain(list(r.ranges)) == r


def test_bool_domain_ops():
    full = BoolD()
    assert list(full.values()) == [False, True]
    assert domain_binop("-", full, full).cardinality() == 0
    assert domain_binop("intersect", full, BoolD(frozenset([True]))).members == frozenset([True])
    with pytest.raises(EvalError):
        domain_binop("union", full, IntD(dom((0, 1))))


def test_matrix_domain_enumeration_order_and_cap():
    md = MatrixD((IntD(dom((1, 2))),), IntD(dom((0, 1))))
    vals = list(domain_enumerate(md))
    assert [v.elements for v in vals] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert md.cardinality() == 4
    big = MatrixD((IntD(dom((1, 10))),), IntD(dom((0, 9))))
    with pytest.raises(EvalError):
        list(domain_enumerate(big, cap=100))
    # bool base enumerates false before true
    mb = MatrixD((IntD(dom((1, 1))),), BoolD())
    assert [v.elements for v in domain_enumerate(mb)] == [(False,), (True,)]


def test_value_in_domain_requires_exact_index_domains():
    md = MatrixD((IntD(dom((1, 2))),), IntD(dom((1, 9))))
    ok = MatrixVal((IntD(dom((1, 2))),), (3, 4))
    shifted = MatrixVal((IntD(dom((0, 1))),), (3, 4))
    assert value_in_domain(ok, md)
    assert not value_in_domain(shifted, md)
    assert not value_in_domain(MatrixVal((IntD(dom((1, 2))),), (3, 99)), md)


def test_matrix_value_indexing():
    m = MatrixVal((IntD(dom((1, 2))), IntD(dom((4, 6)))), (1, 2, 3, 4, 5, 6))
    assert m.get((1, 4)) == 1
    assert m.get((2, 6)) == 6
    assert m.get((1, 5)) == 2
    from eprime.domains import UNDEF

    assert m.get((3, 4)) is UNDEF
    assert m.get((1, 7)) is UNDEF


# --------------------------------------------------------------------------
# Floor division / modulo / power backends

DIV_TABLE = [
    (3, 2, 1),
    (-3, 2, -2),
    (3, -2, -2),
    (-3, -2, 1),
]

MOD_TABLE = [
    (3, 2, 1),
    (-3, 2, 1),
    (3, -2, -1),
    (-3, -2, -1),
]


@pytest.mark.parametrize("a,b,expected", DIV_TABLE)
def test_floor_division(a, b, expected):
    assert safe_div(a, b) == expected


@pytest.mark.parametrize("a,b,expected", MOD_TABLE)
def test_floor_modulo(a, b, expected):
    assert safe_mod(a, b) == expected


def test_div_mod_identity_over_minus50_to_50():
    for a in range(-50, 51):
        for b in range(-50, 51):
            if b == 0:
                continue
            assert a == b * safe_div(a, b) + safe_mod(a, b)
            # sign of a nonzero remainder follows the divisor
            m = safe_mod(a, b)
            assert m == 0 or (m > 0) == (b > 0)


def test_safe_pow_values_and_overflow():
    assert safe_pow(2, 10) == 1024
    assert safe_pow(-2, 3) == -8
    assert safe_pow(-1, 61) == -1
    assert safe_pow(5, 0) == 1
    assert safe_pow(0, 5) == 0
    # totalized defaults
    assert safe_pow(0, 0) == 0
    assert safe_pow(3, -1) == 0
    assert safe_pow(2, 62) == 2**62
    with pytest.raises(EvalError):
        safe_pow(2, 63)
    with pytest.raises(EvalError):
        safe_pow(10, 400)  # must bail early, not loop 400 multiplications past 64 bits


small = st.integers(min_value=-12, max_value=12)
tiny_exp = st.integers(min_value=-3, max_value=6)


@settings(max_examples=300, deadline=None)
@given(small, small, small, small)
def test_interval_soundness_add_sub_mul_abs(al, ah, bl, bh):
    al, ah = min(al, ah), max(al, ah)
    bl, bh = min(bl, bh), max(bl, bh)
    a, b = (al, ah), (bl, bh)
    for x in range(al, ah + 1):
        for y in range(bl, bh + 1):
            lo, hi = interval_add(a, b)
            assert lo <= x + y <= hi
            lo, hi = interval_sub(a, b)
            assert lo <= x - y <= hi
            lo, hi = interval_mul(a, b)
            assert lo <= x * y <= hi
        lo, hi = interval_abs(a)
        assert lo <= abs(x) <= hi


@settings(max_examples=300, deadline=None)
@given(small, small, small, small)
def test_interval_soundness_div_mod(al, ah, bl, bh):
    al, ah = min(al, ah), max(al, ah)
    bl, bh = min(bl, bh), max(bl, bh)
    a, b = (al, ah), (bl, bh)
    for x in range(al, ah + 1):
        for y in range(bl, bh + 1):
            lo, hi = interval_div(a, b)
            assert lo <= safe_div(x, y) <= hi
            lo, hi = interval_mod(a, b)
            assert lo <= safe_mod(x, y) <= hi


@settings(max_examples=200, deadline=None)
@given(st.integers(-6, 6), st.integers(-6, 6), tiny_exp, tiny_exp)
def test_interval_soundness_pow(al, ah, bl, bh):
    al, ah = min(al, ah), max(al, ah)
    bl, bh = min(bl, bh), max(bl, bh)
    lo, hi = interval_pow((al, ah), (bl, bh))
    for x in range(al, ah + 1):
        for y in range(bl, bh + 1):
            assert lo <= safe_pow(x, y) <= hi
