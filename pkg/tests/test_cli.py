"""End-to-end CLI tests: exit codes, exact output bytes, and the property
that printed solutions re-parse as parameter files whose values satisfy
every constraint of the instance under ground evaluation."""

import io
import subprocess
import sys

import pytest

from eprime.ast_nodes import LettingValue, SuchThat
from eprime.cli import build_parser, config_of, run
from eprime.instantiate import bind_parameters, eval_ground
from eprime.parser import parse_model, parse_param_file
from eprime.typecheck import check_model, check_param_model

TINY = """language ESSENCE' 1.0
find x, y : int(1..3)
such that x + y = 4, x < y
"""

UNSAT = """language ESSENCE' 1.0
find x : int(1..3)
such that x != x
"""

OPT = """language ESSENCE' 1.0
find x, y : int(1..5)
such that x + y <= 6
maximising x * y
"""

GIVEN = """language ESSENCE' 1.0
given n : int(1..10)
where n % 2 = 0
find x : int(1..3)
such that x <= n
"""

MATRIX = """language ESSENCE' 1.0
find m : matrix indexed by [int(1..2)] of bool
such that m[1] \\/ m[2], !(m[1] /\\ m[2])
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    cfg = config_of(build_parser().parse_args(list(argv)))
    rc = run(cfg, stdout=out, stderr=err)
    return rc, out.getvalue(), err.getvalue()


def test_first_solution_output_bytes(tmp_path):
    rc, out, err = cli(write(tmp_path, "m.eprime", TINY))
    assert rc == 0
    assert out == "language ESSENCE' 1.0\nletting x = 1\nletting y = 3\n"


def test_all_solutions_output_and_count(tmp_path):
    rc, out, _ = cli(write(tmp_path, "m.eprime", TINY), "--all-solutions")
    assert rc == 0
    assert out == (
        "language ESSENCE' 1.0\n"
        "$ solution 1\n"
        "letting x = 1\n"
        "letting y = 3\n"
        "$ 1 solution\n"
    )


def test_all_solutions_cap(tmp_path):
    path = write(tmp_path, "m.eprime", "language ESSENCE' 1.0\nfind x : int(1..9)\n")
    rc, out, _ = cli(path, "--all-solutions", "4")
    assert rc == 0
    assert out.count("$ solution") == 4
    assert out.endswith("$ 4 solutions\n")


def test_unsat_exit_code_and_silence(tmp_path):
    rc, out, err = cli(write(tmp_path, "m.eprime", UNSAT))
    assert (rc, out) == (1, "")
    rc, out, _ = cli(write(tmp_path, "m2.eprime", UNSAT), "--all-solutions")
    assert (rc, out) == (1, "$ 0 solutions\n")


def test_optimisation_prints_objective_comment(tmp_path):
    rc, out, _ = cli(write(tmp_path, "m.eprime", OPT))
    assert rc == 0
    assert out == "language ESSENCE' 1.0\nletting x = 3\nletting y = 3\n$ objective = 9\n"


def test_matrix_solution_uses_literal_syntax(tmp_path):
    rc, out, _ = cli(write(tmp_path, "m.eprime", MATRIX), "--all-solutions")
    assert rc == 0
    assert "letting m = [false, true ; int(1..2)]" in out
    assert "letting m = [true, false ; int(1..2)]" in out
    assert out.endswith("$ 2 solutions\n")


def test_check_only_is_silent_and_does_not_solve(tmp_path):
    rc, out, err = cli(write(tmp_path, "m.eprime", UNSAT), "--check-only")
    assert (rc, out) == (0, "")  # unsat, but we never solved
    # a parameterised model checks without its parameters
    rc, out, _ = cli(write(tmp_path, "g.eprime", GIVEN), "--check-only")
    assert (rc, out) == (0, "")


def test_param_binding_and_where(tmp_path):
    model = write(tmp_path, "m.eprime", GIVEN)
    good = write(tmp_path, "good.param", "language ESSENCE' 1.0\nletting n = 2\n")
    bad = write(tmp_path, "bad.param", "language ESSENCE' 1.0\nletting n = 3\n")
    rc, out, _ = cli(model, "--param", good)
    assert rc == 0 and out == "language ESSENCE' 1.0\nletting x = 1\n"
    rc, out, err = cli(model, "--param", bad)
    assert rc == 2 and out == "" and "where" in err and "line" in err
    rc, _, err = cli(model)
    assert rc == 2 and "no value given for parameter 'n'" in err
    rc, _, err = cli(model, "--param", bad, "--check-only")
    assert rc == 2 and "where" in err


def test_param_on_parameterless_model_is_rejected(tmp_path):
    model = write(tmp_path, "m.eprime", TINY)
    extra = write(tmp_path, "x.param", "language ESSENCE' 1.0\nletting n = 2\n")
    rc, _, err = cli(model, "--param", extra)
    assert rc == 2 and "n" in err


def test_parse_and_type_errors_carry_positions(tmp_path):
    bad = write(tmp_path, "m.eprime", "language ESSENCE' 1.0\nfind x : int(1..3)\nsuch that x ++ 1 = 2\n")
    rc, _, err = cli(bad)
    assert rc == 2 and "line 3" in err
    badty = write(tmp_path, "t.eprime", "language ESSENCE' 1.0\nfind x : int(1..3)\nsuch that x + 1\n")
    rc, _, err = cli(badty)
    assert rc == 2 and "line 3" in err


def test_missing_file(tmp_path):
    rc, _, err = cli(str(tmp_path / "nope.eprime"))
    assert rc == 2 and "cannot read" in err


def test_dump_flat(tmp_path):
    rc, out, _ = cli(write(tmp_path, "m.eprime", TINY), "--dump-flat")
    assert rc == 0
    assert out == (
        "flatcsp\n"
        "var v0 x int {1..3}\n"
        "var v1 y int {1..3}\n"
        "con linear 1*v0 + 1*v1 = 4\n"
        "con linear 1*v0 + -1*v1 <= -1\n"
        "output x int v0\n"
        "output y int v1\n"
    )


def test_limits_yield_exit_2(tmp_path):
    hard = write(
        tmp_path,
        "h.eprime",
        "language ESSENCE' 1.0\n"
        "find M : matrix indexed by [int(1..8)] of int(1..8)\n"
        "such that allDiff(M)\n",
    )
    rc, out, err = cli(hard, "--all-solutions", "--node-limit", "5")
    assert rc == 2 and out == "" and "limit" in err
    rc, _, err = cli(hard, "--node-limit", "0")
    assert rc == 2 and "positive" in err


def test_mode_flags_are_mutually_exclusive(tmp_path):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args([str(tmp_path / "m.eprime"), "--check-only", "--dump-flat"])
    assert exc.value.code == 2


def test_branching_on_optimisation_emits_note(tmp_path):
    model = write(
        tmp_path,
        "m.eprime",
        "language ESSENCE' 1.0\n"
        "find x, y : int(1..3)\n"
        "branching on [y]\n"
        "such that x + y <= 4\n"
        "maximising x\n",
    )
    rc, out, err = cli(model)
    assert rc == 0
    assert "$ objective = 3" in out
    assert "optimum" in err


def test_console_entry_point_runs(tmp_path):
    # one real subprocess to cover `python -m eprime`
    model = write(tmp_path, "m.eprime", TINY)
    proc = subprocess.run(
        [sys.executable, "-m", "eprime", model], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout == "language ESSENCE' 1.0\nletting x = 1\nletting y = 3\n"


def test_identical_runs_are_byte_identical(tmp_path):
    model = write(tmp_path, "m.eprime", OPT)
    first = cli(model, "--all-solutions")
    second = cli(model, "--all-solutions")
    assert first == second


# --------------------------------------------------------------------------
# printed solutions are valid parameter files satisfying the instance


def letting_env(inst, text):
    parsed = check_param_model(parse_param_file(text))
    env = dict(inst.env)
    for stmt in parsed.model.of_kind(LettingValue):
        env[stmt.name] = eval_ground(stmt.value, env)
    return env


def assert_solutions_satisfy(tmp_path, model_text, param_text=None):
    model = write(tmp_path, "m.eprime", model_text)
    argv = [model, "--all-solutions"]
    if param_text is not None:
        argv += ["--param", write(tmp_path, "p.param", param_text)]
    rc, out, _ = cli(*argv)
    assert rc == 0
    typed = check_model(parse_model(model_text))
    typed_params = (
        check_param_model(parse_param_file(param_text)) if param_text is not None else None
    )
    inst = bind_parameters(typed, typed_params)
    blocks = out.split("$ solution")[1:]
    assert blocks
    for block in blocks:
        body = "\n".join(line for line in block.splitlines()[1:] if line.startswith("letting"))
        env = letting_env(inst, "language ESSENCE' 1.0\n" + body + "\n")
        for stmt in inst.typed.model.of_kind(SuchThat):
            for con in stmt.constraints:
                assert eval_ground(con, env) is True


def test_printed_solutions_satisfy_all_constraints(tmp_path):
    assert_solutions_satisfy(tmp_path, TINY)
    assert_solutions_satisfy(tmp_path, MATRIX)
    assert_solutions_satisfy(
        tmp_path, GIVEN, "language ESSENCE' 1.0\nletting n = 2\n"
    )
    assert_solutions_satisfy(
        tmp_path,
        """language ESSENCE' 1.0
find M : matrix indexed by [int(0..1), int(0..1)] of int(0..2)
such that forAll i : int(0..1) . allDiff(M[i, ..]),
          M[0, 0] + M[1, 1] = 2
""",
    )
