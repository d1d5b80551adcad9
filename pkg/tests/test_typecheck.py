"""Type checker tests: accepted models, rejected models, coercion insertion,
category rules, and soundness of interval bounds inference."""

import random

import pytest

from eprime.ast_nodes import BinOp, Call, Ident, IntLit, UnaryOp, model_text
from eprime.domains import safe_div, safe_mod, safe_pow
from eprime.errors import EvalError, TypeCheckError
from eprime.parser import parse_model, parse_param_file
from eprime.typecheck import (
    CAT_CONST,
    CAT_DECISION,
    CAT_PARAM,
    T_BOOL,
    T_INT,
    TMatrix,
    TSet,
    _Checker,
    Symbol,
    check_model,
    check_param_model,
    infer_bounds,
)

HEADER = "language ESSENCE' 1.0\n"


def check(src: str):
    return check_model(parse_model(HEADER + src))


# --------------------------------------------------------------------------
# Models that must check cleanly


GOOD_MODELS = [
    "find x : int(1..3)\nsuch that x = 2",
    "find b : bool\nsuch that b",
    "given n : int\nfind x : int(1..9)\nsuch that x <= n",
    "given n : int(1..9)\nwhere forAll i : int(1..n) . i <= n\nfind x : int(1..n)",
    "letting v = [ i | i : int(1..3) ]\nfind x : int(1..3)\nsuch that x in toSet(v)",
    "letting t = sum([ i * j | i : int(1..3), j : int(1..i) ])\nfind x : int(1..3)\nsuch that x <= t",
    "find M : matrix indexed by [int(1..2), bool] of int(0..1)\nsuch that M[1, true] = 0",
    "find M : matrix indexed by [int(1..2), bool] of int(0..1)\nsuch that M[true, true] = 0",  # bool coerces as int index
    "find x : int(1..3)\nsuch that x = allDiff([1])",  # bool result coerces in int compare",
    "find M : matrix indexed by [int(1..2), bool] of int(0..1)\nsuch that [0,1] <lex M[.., true]",
    "find x : int(1..3)\nsuch that [1, 2] = [x, x]",
    "find x : int(1..3)\nsuch that [1, 0] = [x = 1, x = 2]",  # mixed bases compare
    "find x, y : int(1..3)\nsuch that allDiff([x, y]), gcc([x, y], [1, 2], [x, y])",
    "find x, y : int(1..3)\nsuch that atleast([x, y], [1], [2]), atmost([x, y], [1], [2])",
    "find x, y : int(1..3)\nsuch that table([x, y], [[1, 2], [2, 3]])",
    "find x, y : int(1..3)\nsuch that alldifferent_except([x, y], 0)",
    "find x : int(1..3)\nsuch that x in int(1, 3) union int(5..6) intersect int(6..9)",
    "letting D be domain int(1..4) - int(2)\nfind x : D",
    "letting MD be domain matrix indexed by [int(1..2)] of int(0..1)\ngiven g : MD\nfind x : int(0..1)\nsuch that x = g[1]",
    "letting A : matrix indexed by [bool] of int(0..9) = [3, 4]\nfind x : int(0..9)\nsuch that x = A[true]",
    "letting E : matrix indexed by [int(1..0)] of int(1..3) = []\nfind x : int(1..3)",
    "find b : bool\nminimising b",  # objective coerces
    "find x : int(1..3)\nmaximising x\nbranching on [x]\nheuristic sdf",
    "find x : int(1..3)\nfind M : matrix indexed by [int(1..3)] of bool\nbranching on [M, x]",
    "find x : int(1..3)\nsuch that forAll i : int(1..3) . exists j : int(1..i) . j < i \\/ x = i",
    "find q : matrix indexed by [int(1..3)] of int(1..3)\nsuch that allDiff(q), sum(flatten(q)) = 6",
    "letting sq = [ [ i * j | j : int(1..3) ] | i : int(1..3) ]\nfind x : int(1..99)\nsuch that x = sq[2, 3]",
    "find x : int(1..3)\nsuch that min(x, 2) = max(1, factorial(3) % 4)",
    "find x : int(1..3)\nsuch that popcount(7) = 3 /\\ x = 1",
]


@pytest.mark.parametrize("src", GOOD_MODELS)
def test_good_model_checks(src):
    check(src)


# --------------------------------------------------------------------------
# Models the checker must reject, with a stable message fragment


BAD_MODELS = [
    ("find x : int", "finite"),
    ("find x : int(1..)", "finite"),
    ("find x : int(1..3)\nsuch that x", "must be boolean"),
    ("find x : int(1..3)\nsuch that toInt(x) = 1", "must be boolean"),
    ("find x : int(1..3)\nsuch that x in bool", "must be boolean"),
    ("find b : bool\nsuch that !(b + 1)", "must be boolean"),
    ("find x : int(1..3)\nwhere x > 1", "cannot contain decision"),
    ("find x : int(1..3)\nsuch that forAll i : int(1..x) . true", "cannot contain decision"),
    ("find x : int(1..3)\nsuch that [ i | i : int(1..3), i < x ] = [1]", "cannot contain decision"),
    ("find x : int(1..3)\nsuch that x in toSet([x])", "cannot contain decision"),
    ("find x, y : int(1..3)\nsuch that atleast([x,y], [y], [1])", "cannot contain decision"),
    ("find x, y : int(1..3)\nsuch that atmost([x,y], [1], [y])", "cannot contain decision"),
    ("find x, y : int(1..3)\nsuch that gcc([x,y], [y], [1])", "cannot contain decision"),
    ("find x, y : int(1..3)\nsuch that alldifferent_except([x,y], y)", "cannot contain decision"),
    ("find x, y : int(1..3)\nsuch that table([x,y], [[y,1]])", "cannot contain decision"),
    ("find x : int(1..3)\nsuch that factorial(x) = 6", "cannot contain decision"),
    ("find x : int(1..3)\nsuch that popcount(x) = 1", "cannot contain decision"),
    ("given m : matrix indexed by [int(1..2)] of int(1..3)\nfind x : int(1..2)\nsuch that m[x] = 1", "decision-variable matrix indices"),
    ("minimising 3\nwhere 1 = 1", "precede the objective"),
    ("minimising 3\nmaximising 4", "at most one objective"),
    ("minimising [1, 2]", "must be an integer"),
    ("letting a = 1\nletting a = 2", "already declared"),
    ("find x : int(1..3)\nsuch that forAll x : int(1..2) . true", "shadows"),
    ("such that [1, true] = [1, 1]", "same type"),
    ("find x : int(1..3)\nsuch that x = [1]", "cannot compare"),
    ("letting q = factorial([1])", "must be an integer"),
    ("find x : int(1..3)\nsuch that x union int(1..2) = 1", "expects two domains"),
    ("find x : int(1..3)\nsuch that x in int(1..2) union bool", "cannot mix"),
    ("letting a = b\nletting b = 1", "undeclared"),
    ("letting a = [1,2][1,2]", "subscripted with 2 positions"),
    ("such that flatten(1, [1,2]) = [1,2]", "needs at least 2 dimensions"),
    ("letting v = [[1,2],[3,4]]\nsuch that v = v", "one-dimensional matrices only"),
    ("letting v = [[1,2],[3,4]]\nsuch that v <lex v", "one-dimensional"),
    ("letting v = [1,2]\nsuch that and(v)", "matrix of booleans"),
    ("letting e1 = []", "declared matrix domain"),
    ("find M : matrix indexed by [int(1..2), bool] of int(0..1)\nsuch that M[1, 2] = 0", "bool-indexed position"),
    ("find M : matrix indexed by [int(1..2), bool] of int(0..1)\nsuch that M[[1], true] = 0", "must be an integer"),
    ("find M : matrix indexed by [int(1..2), bool] of int(0..1)\nsuch that M[1] = 0", "subscripted with 1 positions"),
    ("find x : int(1..3)\nletting a = x + 1", "parameters and constants only"),
    ("find x : int(1..3)\ngiven g : int(1..x)", "cannot contain decision"),
    ("find x : int(1..3)\nfind y : int(1..x)", "cannot contain decision"),
    ("letting n = 3\nsuch that mystery(n) = 1", "unknown function"),
    ("letting n = 3\nsuch that toInt(true, false) = 1", "expects 1 argument"),
    ("letting s = toSet([1])\nletting t = s + 1", "must be an integer"),
    ("find x : int(1..3)\nsuch that sum([x]) = x /\\ sum([[x],[x]]) = x", "must be 1-dimensional"),
]


@pytest.mark.parametrize("src,frag", BAD_MODELS)
def test_bad_model_rejected(src, frag):
    with pytest.raises(TypeCheckError) as exc:
        check(src)
    assert frag in str(exc.value), f"expected {frag!r} in {exc.value}"


# --------------------------------------------------------------------------
# Coercion insertion


def test_coercion_inserts_toint_and_is_idempotent():
    m = parse_model(HEADER + "find b : bool\nfind z : int(0..5)\nsuch that z = b + 3, z >= b\n")
    check_model(m)
    text1 = model_text(m)
    assert "(z = (toInt(b) + 3))" in text1
    assert "(z >= toInt(b))" in text1
    check_model(m)  # re-checking must not rewrap
    assert model_text(m) == text1


def test_sum_body_coerces():
    m = parse_model(HEADER + "find b : bool\nsuch that (sum i : int(1..3) . b) = 2\n")
    check_model(m)
    assert "sum i : int(1..3) . toInt(b)" in model_text(m)


def test_objective_coerces():
    m = parse_model(HEADER + "find b : bool\nminimising b\n")
    check_model(m)
    assert "minimising toInt(b)" in model_text(m)


def test_int_never_narrows_to_bool():
    with pytest.raises(TypeCheckError):
        check("find x : int(0..1)\nsuch that x /\\ true")


# --------------------------------------------------------------------------
# Symbol table contents


def test_symbol_types_and_categories():
    tm = check(
        "given n : int(1..9)\n"
        "letting c = 2 * n\n"
        "letting D be domain int(1..c)\n"
        "given M : matrix indexed by [D, bool] of int(0..1)\n"
        "find x : D\n"
        "find B : matrix indexed by [D] of bool\n"
    )
    s = tm.symbols
    assert s["n"].type == T_INT and s["n"].category == CAT_PARAM
    assert s["c"].type == T_INT and s["c"].category == CAT_PARAM
    assert s["D"].type.kind == "int"
    assert s["M"].type == TMatrix(("int", "bool"), T_INT)
    assert s["x"].type == T_INT and s["x"].category == CAT_DECISION
    assert s["B"].type == TMatrix(("int",), T_BOOL)
    assert s["B"].category == CAT_DECISION


def test_letting_matrix_reindex_keeps_declared_kinds():
    tm = check("letting A : matrix indexed by [bool] of int(0..9) = [3, 4]\n")
    assert tm.symbols["A"].type == TMatrix(("bool",), T_INT)


def test_slice_type_drops_fixed_dimensions_and_reindexes():
    # kept dimensions reindex contiguously from 1, so a kept bool dim becomes int
    tm = check("find M : matrix indexed by [int(1..2), bool] of int(0..1)\nsuch that sum(M[1, ..]) = 1\n")
    st = tm.model.of_kind(type(tm.model.statements[-1]))[-1]
    con = st.constraints[0]
    assert con.left.args[0].etype == TMatrix(("int",), T_INT)


def test_toset_type():
    tm = check("letting s = toSet([1, 2, 2])\n")
    assert tm.symbols["s"].type == TSet(T_INT)


def test_param_file_checker():
    tp = check_param_model(parse_param_file(HEADER + "letting n = 3\nletting m = n * n\n"))
    assert tp.symbols["m"].type == T_INT
    assert tp.params


# --------------------------------------------------------------------------
# Bounds inference


def _typed(expr_nodes, var_bounds):
    ch = _Checker()
    for name in var_bounds:
        ch.symbols[name] = Symbol(name, T_INT, CAT_DECISION)
    ch.check(expr_nodes)
    return expr_nodes


def test_bounds_addition_example():
    # x : int(1..10) |- x + 3 in [4, 13]
    e = _typed(BinOp(0, 0, "+", Ident(0, 0, "x"), IntLit(0, 0, 3)), {"x": None})
    assert infer_bounds(e, {"x": (1, 10)}) == (4, 13)


def test_bounds_mixed_expression():
    from eprime.parser import parse_expression

    e = parse_expression("(x + 3) * y - toInt(x > y)")
    _typed(e, {"x": None, "y": None})
    assert infer_bounds(e, {"x": (1, 10), "y": (-2, 3)}) == (-27, 39)


def test_bounds_clip_to_int64():
    from eprime.domains import INT64_MAX, INT64_MIN
    from eprime.parser import parse_expression

    e = parse_expression("x ** y")
    _typed(e, {"x": None, "y": None})
    lo, hi = infer_bounds(e, {"x": (INT64_MIN, INT64_MAX), "y": (0, INT64_MAX)})
    assert lo >= INT64_MIN and hi <= INT64_MAX


# Property: brute-force evaluation under the totalized operators never leaves
# the inferred interval.


def _eval_total(e, env):
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Ident):
        return env[e.name]
    if isinstance(e, UnaryOp):
        v = _eval_total(e.operand, env)
        return -v if e.op == "-" else abs(v)
    if isinstance(e, Call):
        if e.name == "toInt":
            return _eval_total(e.args[0], env)
        a = _eval_total(e.args[0], env)
        b = _eval_total(e.args[1], env)
        return min(a, b) if e.name == "min" else max(a, b)
    assert isinstance(e, BinOp)
    a = _eval_total(e.left, env)
    b = _eval_total(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        return safe_div(a, b)
    if e.op == "%":
        return safe_mod(a, b)
    if e.op == "**":
        return safe_pow(a, b)
    if e.op == "<":
        return int(a < b)
    if e.op == "<=":
        return int(a <= b)
    if e.op == "=":
        return int(a == b)
    raise AssertionError(e.op)


def _random_expr(rng, names, depth):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return Ident(0, 0, rng.choice(names))
        return IntLit(0, 0, rng.randint(-4, 4))
    pick = rng.random()
    if pick < 0.10:
        return UnaryOp(0, 0, rng.choice(["-", "abs"]), _random_expr(rng, names, depth - 1))
    if pick < 0.20:
        f = rng.choice(["min", "max"])
        return Call(0, 0, f, [_random_expr(rng, names, depth - 1), _random_expr(rng, names, depth - 1)])
    op = rng.choice(["+", "-", "*", "/", "%", "**", "+", "-", "*"])
    return BinOp(0, 0, op, _random_expr(rng, names, depth - 1), _random_expr(rng, names, depth - 1))


def test_bounds_sound_on_random_expressions():
    rng = random.Random(20260814)
    names = ["a", "b", "c"]
    checked_values = 0
    for _ in range(400):
        e = _random_expr(rng, names, rng.randint(1, 4))
        ch = _Checker()
        doms = {}
        for n in names:
            lo = rng.randint(-5, 3)
            doms[n] = (lo, lo + rng.randint(0, 5))
            ch.symbols[n] = Symbol(n, T_INT, CAT_DECISION)
        ch.check(e)
        lo, hi = infer_bounds(e, doms)
        assert lo <= hi
        envs = [{}]
        for n in names:
            envs = [dict(env, **{n: v}) for env in envs for v in range(doms[n][0], doms[n][1] + 1)]
        for env in envs:
            try:
                v = _eval_total(e, env)
            except EvalError:
                continue  # 64-bit overflow is a hard error, not a value
            assert lo <= v <= hi, f"{v} outside [{lo},{hi}] for env {env}"
            checked_values += 1
    assert checked_values > 10000
