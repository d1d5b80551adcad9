"""Depth-first backtracking search with constraint propagation over a FlatCSP.

Search follows the branching-on list first (falling back to declaration
order), ascending value order, with the `static` or `sdf` (smallest domain
first) variable heuristics. Optimization is branch-and-bound: each incumbent
tightens a strictly-better bound on the objective variable, re-applied at
every propagation call so it survives backtracking.

verify_solution is an independent safety net: it re-evaluates every
constraint against a complete assignment with its own straight-line
arithmetic and shares no code with the propagators. Every solution the
search claims is passed through it before being reported.
"""

from __future__ import annotations

import sys
import time
from collections import deque
from dataclasses import dataclass, field

from .domains import safe_div, safe_mod, safe_pow
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
    PowCon,
    ProductCon,
    ReifInSet,
    ReifLinear,
    TableCon,
    constraint_vars,
)

_SUPPORT_CAP = 4096


@dataclass
class SolverConfig:
    all_solutions: bool = False
    solution_limit: int | None = None
    node_limit: int | None = None
    time_limit: float | None = None


@dataclass
class SearchOutcome:
    status: str  # 'sat' | 'unsat' | 'optimal' | 'unknown'
    solutions: list[tuple[int, ...]] = field(default_factory=list)
    objective_value: int | None = None
    nodes: int = 0
    backtracks: int = 0
    solve_time: float = 0.0
    warnings: list[str] = field(default_factory=list)


class _Conflict(Exception):
    pass


class _Limit(Exception):
    pass


class _Search:
    def __init__(self, csp: FlatCSP, cfg: SolverConfig):
        self.csp = csp
        self.cfg = cfg
        self.doms: list[set[int]] = [set(v.values) for v in csp.variables]
        self.trail: list[tuple[int, int]] = []
        self.marks: list[int] = []
        self.watchers: list[list[int]] = [[] for _ in csp.variables]
        for cid, con in enumerate(csp.constraints):
            for v in sorted(set(constraint_vars(con))):
                self.watchers[v].append(cid)
        self.queue: deque[int] = deque()
        self.queued: list[bool] = [False] * len(csp.constraints)
        self.nodes = 0
        self.backtracks = 0
        self.deadline = time.monotonic() + cfg.time_limit if cfg.time_limit else None
        # branch-and-bound state: ('minimising'|'maximising', var, best-so-far)
        self.obj_sense: str | None = None
        self.obj_var: int | None = None
        self.best: int | None = None
        pool = csp.branching if csp.branching is not None else list(range(len(csp.variables)))
        in_pool = set(pool)
        self.order = list(pool) + [v for v in range(len(csp.variables)) if v not in in_pool]
        self.pool_size = len(pool)
        self.sdf = csp.heuristic == "sdf"

    # ---- domain operations (every removal is trailed)

    def remove(self, var: int, val: int):
        d = self.doms[var]
        if val not in d:
            return
        d.remove(val)
        self.trail.append((var, val))
        if not d:
            raise _Conflict
        for cid in self.watchers[var]:
            if not self.queued[cid]:
                self.queued[cid] = True
                self.queue.append(cid)

    def keep_only(self, var: int, allowed):
        for val in [v for v in self.doms[var] if v not in allowed]:
            self.remove(var, val)

    def assign(self, var: int, val: int):
        if val not in self.doms[var]:
            raise _Conflict
        self.keep_only(var, (val,))

    def lo(self, var: int) -> int:
        return min(self.doms[var])

    def hi(self, var: int) -> int:
        return max(self.doms[var])

    def fixed(self, var: int) -> bool:
        return len(self.doms[var]) == 1

    def value(self, var: int) -> int:
        (v,) = self.doms[var]
        return v

    def set_min(self, var: int, bound: int):
        for val in [v for v in self.doms[var] if v < bound]:
            self.remove(var, val)

    def set_max(self, var: int, bound: int):
        for val in [v for v in self.doms[var] if v > bound]:
            self.remove(var, val)

    # ---- trail

    def push(self):
        self.marks.append(len(self.trail))

    def pop(self):
        mark = self.marks.pop()
        while len(self.trail) > mark:
            var, val = self.trail.pop()
            self.doms[var].add(val)
        self.queue.clear()
        self.queued = [False] * len(self.csp.constraints)

    # ---- literals

    def lit_state(self, lit) -> bool | None:
        """True/False when decided, None when the variable is still open."""
        var, positive = lit
        if not self.fixed(var):
            return None
        return (self.value(var) == 1) == positive

    def set_lit(self, lit, truth: bool):
        var, positive = lit
        self.assign(var, 1 if truth == positive else 0)

    # ---- propagation

    def propagate(self) -> bool:
        try:
            if self.best is not None:
                if self.obj_sense == "minimising":
                    self.set_max(self.obj_var, self.best - 1)
                else:
                    self.set_min(self.obj_var, self.best + 1)
            while self.queue:
                cid = self.queue.popleft()
                self.queued[cid] = False
                self._dispatch(self.csp.constraints[cid])
        except _Conflict:
            self.queue.clear()
            self.queued = [False] * len(self.csp.constraints)
            return False
        return True

    def wake_all(self):
        for cid in range(len(self.csp.constraints)):
            if not self.queued[cid]:
                self.queued[cid] = True
                self.queue.append(cid)

    def _dispatch(self, con):
        if isinstance(con, LinearCon):
            self._prop_linear(con.terms, con.op, con.rhs)
        elif isinstance(con, ReifLinear):
            self._prop_reif_linear(con)
        elif isinstance(con, ReifInSet):
            self._prop_reif_inset(con)
        elif isinstance(con, ClauseCon):
            self._prop_clause(con)
        elif isinstance(con, ProductCon):
            self._prop_pair(con.x, con.y, con.z, lambda a, b: a * b)
        elif isinstance(con, DivCon):
            self._prop_pair(con.x, con.y, con.z, safe_div)
        elif isinstance(con, ModCon):
            self._prop_pair(con.x, con.y, con.z, safe_mod)
        elif isinstance(con, PowCon):
            self._prop_pair(con.x, con.y, con.z, safe_pow)
        elif isinstance(con, AbsCon):
            self._prop_abs(con)
        elif isinstance(con, MinCon):
            self._prop_minmax(con.xs, con.z, want_min=True)
        elif isinstance(con, MaxCon):
            self._prop_minmax(con.xs, con.z, want_min=False)
        elif isinstance(con, AllDiffCon):
            self._prop_alldiff(con.xs)
        elif isinstance(con, AllDiffExceptCon):
            self._prop_alldiff_except(con)
        elif isinstance(con, GccCon):
            self._prop_gcc(con)
        elif isinstance(con, AtleastCon):
            self._prop_atleast(con)
        elif isinstance(con, AtmostCon):
            self._prop_atmost(con)
        elif isinstance(con, TableCon):
            self._prop_table(con)
        elif isinstance(con, LexCon):
            self._prop_lex(con)
        else:
            raise AssertionError(f"no propagator for {con!r}")

    # linear sums ------------------------------------------------------------

    def _lin_bounds(self, terms) -> tuple[int, int]:
        lo = 0
        hi = 0
        for c, v in terms:
            a, b = c * self.lo(v), c * self.hi(v)
            lo += min(a, b)
            hi += max(a, b)
        return lo, hi

    def _prop_linear(self, terms, op, rhs):
        if op == "!=":
            free = [(c, v) for c, v in terms if not self.fixed(v)]
            s = sum(c * self.value(v) for c, v in terms if self.fixed(v))
            if not free:
                if s == rhs:
                    raise _Conflict
                return
            if len(free) == 1:
                c, v = free[0]
                if (rhs - s) % c == 0:
                    self.remove(v, (rhs - s) // c)
            return
        # op is '=' or '<='
        for i, (c, v) in enumerate(terms):
            rest_lo = 0
            rest_hi = 0
            for j, (c2, v2) in enumerate(terms):
                if j == i:
                    continue
                a, b = c2 * self.lo(v2), c2 * self.hi(v2)
                rest_lo += min(a, b)
                rest_hi += max(a, b)
            # c*v <= rhs - rest_lo
            ub = rhs - rest_lo
            if c > 0:
                self.set_max(v, ub // c)
            else:
                self.set_min(v, -(ub // -c))  # ceil(ub/c) for c < 0
            if op == "=":
                # c*v >= rhs - rest_hi
                lb = rhs - rest_hi
                if c > 0:
                    self.set_min(v, -(-lb // c))  # ceil(lb/c)
                else:
                    self.set_max(v, lb // c)
        if op == "=" and len(terms) == 2:
            (c1, v1), (c2, v2) = terms
            if len(self.doms[v1]) * len(self.doms[v2]) <= _SUPPORT_CAP:
                d2 = self.doms[v2]
                keep1 = set()
                keep2 = set()
                for a in self.doms[v1]:
                    r = rhs - c1 * a
                    if r % c2 == 0 and r // c2 in d2:
                        keep1.add(a)
                        keep2.add(r // c2)
                self.keep_only(v1, keep1)
                self.keep_only(v2, keep2)
        if op == "=" and len(terms) == 1:
            c, v = terms[0]
            if rhs % c == 0:
                self.assign(v, rhs // c)
            else:
                raise _Conflict

    def _lin_entailment(self, terms, op, rhs) -> bool | None:
        """True/False when the comparison is decided by bounds, else None."""
        lo, hi = self._lin_bounds(terms)
        if op == "=":
            if lo == hi == rhs:
                return True
            if rhs < lo or rhs > hi:
                return False
            return None
        if op == "!=":
            if rhs < lo or rhs > hi:
                return True
            if lo == hi == rhs:
                return False
            return None
        # '<='
        if hi <= rhs:
            return True
        if lo > rhs:
            return False
        return None

    def _prop_reif_linear(self, con: ReifLinear):
        state = self.lit_state(con.lit)
        if state is True:
            self._prop_linear(con.terms, con.op, con.rhs)
        elif state is False:
            self._prop_linear(*_negated_linear(con.terms, con.op, con.rhs))
        else:
            ent = self._lin_entailment(con.terms, con.op, con.rhs)
            if ent is not None:
                self.set_lit(con.lit, ent)

    def _prop_reif_inset(self, con: ReifInSet):
        state = self.lit_state(con.lit)
        d = self.doms[con.var]
        if state is True:
            self.keep_only(con.var, con.values)
        elif state is False:
            for val in [v for v in d if v in con.values]:
                self.remove(con.var, val)
        else:
            if d <= con.values:
                self.set_lit(con.lit, True)
            elif not (d & con.values):
                self.set_lit(con.lit, False)

    def _prop_clause(self, con: ClauseCon):
        unfixed = []
        for lit in con.lits:
            s = self.lit_state(lit)
            if s is True:
                return
            if s is None:
                unfixed.append(lit)
        if not unfixed:
            raise _Conflict
        if len(unfixed) == 1:
            self.set_lit(unfixed[0], True)

    # functional constraints ---------------------------------------------------

    def _prop_pair(self, x: int, y: int, z: int, fn):
        dx, dy, dz = self.doms[x], self.doms[y], self.doms[z]
        if len(dx) * len(dy) > _SUPPORT_CAP:
            # too many pairs: only conclude once both inputs are fixed
            if len(dx) == 1 and len(dy) == 1:
                self.assign(z, fn(next(iter(dx)), next(iter(dy))))
            return
        keep_x = set()
        keep_y = set()
        keep_z = set()
        for a in dx:
            for b in dy:
                r = fn(a, b)
                if r in dz:
                    keep_x.add(a)
                    keep_y.add(b)
                    keep_z.add(r)
        self.keep_only(x, keep_x)
        self.keep_only(y, keep_y)
        self.keep_only(z, keep_z)

    def _prop_abs(self, con: AbsCon):
        dx, dz = self.doms[con.x], self.doms[con.z]
        self.keep_only(con.z, {abs(a) for a in dx})
        self.keep_only(con.x, {a for a in dx if abs(a) in dz})

    def _prop_minmax(self, xs, z, want_min: bool):
        pick = min if want_min else max
        self.set_min(z, pick(self.lo(x) for x in xs))
        self.set_max(z, pick(self.hi(x) for x in xs))
        union = set()
        for x in xs:
            union |= self.doms[x]
        self.keep_only(z, union)
        bound = self.lo(z) if want_min else self.hi(z)
        for x in xs:
            if want_min:
                self.set_min(x, bound)
            else:
                self.set_max(x, bound)

    # global constraints -------------------------------------------------------

    def _prop_alldiff(self, xs):
        union = set()
        for x in xs:
            union |= self.doms[x]
        if len(union) < len(xs):
            raise _Conflict
        for i, x in enumerate(xs):
            if self.fixed(x):
                val = self.value(x)
                for j, other in enumerate(xs):
                    if j != i:
                        self.remove(other, val)
        if len(union) == len(xs):
            # tight: every value is used exactly once
            for val in sorted(union):
                holders = [x for x in xs if val in self.doms[x]]
                if not holders:
                    raise _Conflict
                if len(holders) == 1:
                    self.assign(holders[0], val)

    def _prop_alldiff_except(self, con: AllDiffExceptCon):
        xs = con.xs
        for i, x in enumerate(xs):
            if self.fixed(x):
                val = self.value(x)
                if val == con.value:
                    continue
                for j, other in enumerate(xs):
                    if j != i:
                        self.remove(other, val)

    def _counts(self, xs, val: int) -> tuple[int, int]:
        n_fixed = 0
        n_possible = 0
        for x in xs:
            d = self.doms[x]
            if val in d:
                n_possible += 1
                if len(d) == 1:
                    n_fixed += 1
        return n_fixed, n_possible

    def _force_value(self, xs, val: int):
        for x in xs:
            if val in self.doms[x]:
                self.assign(x, val)

    def _block_value(self, xs, val: int):
        for x in xs:
            if not self.fixed(x):
                self.remove(x, val)

    def _prop_gcc(self, con: GccCon):
        for val, cvar in zip(con.vals, con.counts):
            n_fixed, n_possible = self._counts(con.xs, val)
            self.set_min(cvar, n_fixed)
            self.set_max(cvar, n_possible)
            if n_possible == self.lo(cvar):
                self._force_value(con.xs, val)
            if n_fixed == self.hi(cvar):
                self._block_value(con.xs, val)

    def _prop_atleast(self, con: AtleastCon):
        for cnt, val in zip(con.counts, con.vals):
            n_fixed, n_possible = self._counts(con.xs, val)
            if n_possible < cnt:
                raise _Conflict
            if n_possible == cnt:
                self._force_value(con.xs, val)

    def _prop_atmost(self, con: AtmostCon):
        for cnt, val in zip(con.counts, con.vals):
            n_fixed, n_possible = self._counts(con.xs, val)
            if n_fixed > cnt:
                raise _Conflict
            if n_fixed == cnt:
                self._block_value(con.xs, val)

    def _prop_table(self, con: TableCon):
        supported = [set() for _ in con.scope]
        alive = False
        for tup in con.tuples:
            if all(val in self.doms[x] for x, val in zip(con.scope, tup)):
                alive = True
                for i, val in enumerate(tup):
                    supported[i].add(val)
        if not alive:
            raise _Conflict
        for x, sup in zip(con.scope, supported):
            self.keep_only(x, sup)

    def _prop_lex(self, con: LexCon):
        xs, ys = con.xs, con.ys
        i = 0
        while (
            i < len(xs)
            and i < len(ys)
            and self.fixed(xs[i])
            and self.fixed(ys[i])
            and self.value(xs[i]) == self.value(ys[i])
        ):
            i += 1
        if i == len(xs):
            if con.strict and len(ys) == len(xs):
                raise _Conflict
            return
        if i == len(ys):
            raise _Conflict  # left side is a strict extension of the right
        # prefix before i is fixed equal; position i must satisfy xs[i] <= ys[i],
        # strictly when the tail cannot absorb the tie
        self.set_max(xs[i], self.hi(ys[i]))
        self.set_min(ys[i], self.lo(xs[i]))
        if not self._lex_tail_feasible(con, i + 1):
            self.set_max(xs[i], self.hi(ys[i]) - 1)
            self.set_min(ys[i], self.lo(xs[i]) + 1)

    def _lex_tail_feasible(self, con: LexCon, j: int) -> bool:
        """Can the suffix from j make the comparison hold if everything before
        ties? Walk optimistically: lo(x) vs hi(y)."""
        xs, ys = con.xs, con.ys
        while True:
            if j == len(xs):
                return (not con.strict) or j < len(ys)
            if j == len(ys):
                return False
            if self.lo(xs[j]) < self.hi(ys[j]):
                return True
            if self.lo(xs[j]) > self.hi(ys[j]):
                return False
            j += 1

    # ---- search

    def pick_var(self) -> int | None:
        if self.sdf:
            best = None
            best_size = None
            for v in self.order[: self.pool_size]:
                size = len(self.doms[v])
                if size > 1 and (best_size is None or size < best_size):
                    best, best_size = v, size
            if best is not None:
                return best
            for v in self.order[self.pool_size :]:
                if len(self.doms[v]) > 1:
                    return v
            return None
        for v in self.order:
            if len(self.doms[v]) > 1:
                return v
        return None

    def check_limits(self):
        if self.cfg.node_limit is not None and self.nodes >= self.cfg.node_limit:
            raise _Limit
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Limit

    def run(self, on_solution) -> None:
        """DFS; calls on_solution(assignment) at every full assignment.
        on_solution returns False to stop the search."""
        self.wake_all()
        if not self.propagate():
            return
        self._label(on_solution)

    def _label(self, on_solution) -> bool:
        self.check_limits()
        var = self.pick_var()
        if var is None:
            assignment = tuple(self.value(v) for v in range(len(self.csp.variables)))
            return on_solution(assignment)
        for val in sorted(self.doms[var]):
            if val not in self.doms[var]:
                continue  # removed by a bound applied after a sibling solution
            self.nodes += 1
            self.check_limits()
            self.push()
            try:
                self.assign(var, val)
                ok = self.propagate()
            except _Conflict:
                ok = False
            if ok and not self._label(on_solution):
                self.pop()
                return False
            self.pop()
            self.backtracks += 1
            # branch-and-bound: the bound may have moved; prune this variable
            if self.best is not None and not self.propagate():
                return True
        return True


def _negated_linear(terms, op, rhs):
    if op == "=":
        return terms, "!=", rhs
    if op == "!=":
        return terms, "=", rhs
    # not (sum <= rhs)  <=>  sum >= rhs+1  <=>  -sum <= -(rhs+1)
    return tuple((-c, v) for c, v in terms), "<=", -(rhs + 1)


def _finish(search: _Search, status: str, solutions, objective_value, t0, warnings=()):
    return SearchOutcome(
        status=status,
        solutions=solutions,
        objective_value=objective_value,
        nodes=search.nodes if search else 0,
        backtracks=search.backtracks if search else 0,
        solve_time=time.perf_counter() - t0,
        warnings=list(warnings),
    )


def _prepare(csp: FlatCSP, cfg: SolverConfig | None) -> SolverConfig:
    cfg = cfg or SolverConfig()
    limit = sys.getrecursionlimit()
    needed = 4 * len(csp.variables) + 200
    if needed > limit:
        sys.setrecursionlimit(needed)
    return cfg


def solve(csp: FlatCSP, cfg: SolverConfig | None = None) -> SearchOutcome:
    """Satisfaction search: first solution, or every solution in
    all-solutions mode (up to the solution limit)."""
    cfg = _prepare(csp, cfg)
    t0 = time.perf_counter()
    if csp.trivially_unsat:
        return _finish(None, "unsat", [], None, t0)
    search = _Search(csp, cfg)
    solutions: list[tuple[int, ...]] = []

    def on_solution(assignment) -> bool:
        _check_claim(csp, assignment)
        solutions.append(assignment)
        if not cfg.all_solutions:
            return False
        return cfg.solution_limit is None or len(solutions) < cfg.solution_limit

    try:
        search.run(on_solution)
    except _Limit:
        return _finish(search, "unknown", solutions, None, t0)
    status = "sat" if solutions else "unsat"
    return _finish(search, status, solutions, None, t0)


def optimize(csp: FlatCSP, cfg: SolverConfig | None = None) -> SearchOutcome:
    """Branch-and-bound over the objective variable; exhausts the search, so
    the result is the true optimum."""
    assert csp.objective is not None, "optimize needs an objective"
    cfg = _prepare(csp, cfg)
    t0 = time.perf_counter()
    warnings = []
    if csp.branching is not None:
        warnings.append(
            "branching-on does not restrict optimization: the search still "
            "proves the true optimum over all variables"
        )
    if csp.trivially_unsat:
        return _finish(None, "unsat", [], None, t0, warnings)
    sense, obj_var = csp.objective
    search = _Search(csp, cfg)
    search.obj_sense = sense
    search.obj_var = obj_var
    best_solution: list[tuple[int, ...]] = []

    def on_solution(assignment) -> bool:
        _check_claim(csp, assignment)
        best_solution[:] = [assignment]
        search.best = assignment[obj_var]
        return True  # keep searching for better incumbents

    try:
        search.run(on_solution)
    except _Limit:
        status = "unknown"
    else:
        status = "optimal" if best_solution else "unsat"
    value = best_solution[0][obj_var] if best_solution else None
    return _finish(search, status, best_solution, value, t0, warnings)


def _check_claim(csp: FlatCSP, assignment):
    if not verify_solution(csp, assignment):
        raise RuntimeError(
            "internal error: the search produced an assignment that fails "
            "independent verification"
        )


# --------------------------------------------------------------------------
# Independent verification. This is deliberately separate from the
# propagators above: plain arithmetic, one straight-line check per
# constraint kind, no shared helpers.


def verify_solution(csp: FlatCSP, assignment) -> bool:
    if len(assignment) != len(csp.variables):
        raise ValueError(
            f"assignment covers {len(assignment)} of {len(csp.variables)} variables"
        )
    for var, val in zip(csp.variables, assignment):
        if val not in var.values:
            return False
    for con in csp.constraints:
        if not _holds(con, assignment):
            return False
    return True


def _cmp(total: int, op: str, rhs: int) -> bool:
    if op == "=":
        return total == rhs
    if op == "!=":
        return total != rhs
    return total <= rhs


def _lit_true(lit, a) -> bool:
    var, positive = lit
    return (a[var] == 1) == positive


def _holds(con, a) -> bool:
    if isinstance(con, LinearCon):
        return _cmp(sum(c * a[v] for c, v in con.terms), con.op, con.rhs)
    if isinstance(con, ReifLinear):
        holds = _cmp(sum(c * a[v] for c, v in con.terms), con.op, con.rhs)
        return _lit_true(con.lit, a) == holds
    if isinstance(con, ReifInSet):
        return _lit_true(con.lit, a) == (a[con.var] in con.values)
    if isinstance(con, ClauseCon):
        return any(_lit_true(lit, a) for lit in con.lits)
    if isinstance(con, ProductCon):
        return a[con.z] == a[con.x] * a[con.y]
    if isinstance(con, DivCon):
        x, y = a[con.x], a[con.y]
        if y == 0:
            return a[con.z] == 0
        q = x // y  # Python floor division matches the language's rounding
        return a[con.z] == q
    if isinstance(con, ModCon):
        x, y = a[con.x], a[con.y]
        if y == 0:
            return a[con.z] == 0
        return a[con.z] == x - y * (x // y)
    if isinstance(con, PowCon):
        x, y = a[con.x], a[con.y]
        if y < 0 or (x == 0 and y == 0):
            return a[con.z] == 0
        if x == 0:
            r = 0
        elif x == 1:
            r = 1
        elif x == -1:
            r = 1 if y % 2 == 0 else -1
        else:
            r = 1
            for _ in range(y):  # flattening bounds the exponent for |x| >= 2
                r *= x
        return a[con.z] == r
    if isinstance(con, AbsCon):
        return a[con.z] == (a[con.x] if a[con.x] >= 0 else -a[con.x])
    if isinstance(con, MinCon):
        best = a[con.xs[0]]
        for x in con.xs[1:]:
            if a[x] < best:
                best = a[x]
        return a[con.z] == best
    if isinstance(con, MaxCon):
        best = a[con.xs[0]]
        for x in con.xs[1:]:
            if a[x] > best:
                best = a[x]
        return a[con.z] == best
    if isinstance(con, AllDiffCon):
        vals = [a[x] for x in con.xs]
        return len(set(vals)) == len(vals)
    if isinstance(con, AllDiffExceptCon):
        vals = [a[x] for x in con.xs if a[x] != con.value]
        return len(set(vals)) == len(vals)
    if isinstance(con, GccCon):
        for val, cvar in zip(con.vals, con.counts):
            if sum(1 for x in con.xs if a[x] == val) != a[cvar]:
                return False
        return True
    if isinstance(con, AtleastCon):
        for cnt, val in zip(con.counts, con.vals):
            if sum(1 for x in con.xs if a[x] == val) < cnt:
                return False
        return True
    if isinstance(con, AtmostCon):
        for cnt, val in zip(con.counts, con.vals):
            if sum(1 for x in con.xs if a[x] == val) > cnt:
                return False
        return True
    if isinstance(con, TableCon):
        row = tuple(a[x] for x in con.scope)
        return row in con.tuples
    if isinstance(con, LexCon):
        xs = [a[x] for x in con.xs]
        ys = [a[y] for y in con.ys]
        for u, w in zip(xs, ys):
            if u < w:
                return True
            if u > w:
                return False
        if len(xs) < len(ys):
            return True
        if len(xs) > len(ys):
            return False
        return not con.strict
    raise AssertionError(f"no checker for {con!r}")
