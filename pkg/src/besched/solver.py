"""Built-in exact branch-and-bound for desk-scale models.

The LP relaxation of each node is solved either by the package's own dense
two-phase simplex or, above a size threshold, by scipy's HiGHS LP interface
(the tree search itself is always ours).  Node exploration is sequential and
deterministic: branch on the most fractional integer variable (ties by
lowest variable index), dive on the floor branch first, backtrack to the
open node with the best bound.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure, SolverError
from .milp import EQ, GE, LE, Model

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIME_LIMIT = "timeLimit"

# dense simplex is preferred up to this many rows + columns
_DENSE_LIMIT = 500


@dataclass
class SolveOptions:
    backend: str = "builtin"
    command: str | None = None  # external template with {in} and {out}
    gap_tol: float = 1e-6  # absolute optimality gap
    time_limit: float | None = None  # seconds
    int_tol: float = 1e-6  # integer feasibility tolerance
    lp_backend: str = "auto"  # auto | dense | highs
    verify_tol: float = 1e-6

    def __post_init__(self):
        if self.gap_tol <= 0 or self.int_tol <= 0 or self.verify_tol <= 0:
            raise SolverError("tolerances must be positive")


@dataclass
class Solution:
    status: str
    values: dict = field(default_factory=dict)  # variable name -> value
    objective: float = math.nan
    stats: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status in (OPTIMAL, FEASIBLE)

    def vector(self, model: Model) -> np.ndarray:
        return np.array([self.values[v.name] for v in model.vars])


class ModelArrays:
    """Array view of a model shared by presolve, LP backends, and verification."""

    def __init__(self, model: Model):
        self.model = model
        n = len(model.vars)
        self.n = n
        self.c = np.zeros(n)
        for vid, coef in model.objective.terms.items():
            self.c[vid] = coef
        self.obj_const = model.objective.const
        self.lo = np.array([v.domain.lo for v in model.vars], dtype=float)
        self.hi = np.array([v.domain.hi for v in model.vars], dtype=float)
        self.integral = np.array([v.domain.is_integral for v in model.vars], dtype=bool)
        self.rows = []
        for con in model.constraints:
            idx = np.fromiter(con.terms.keys(), dtype=int, count=len(con.terms))
            coefs = np.fromiter(con.terms.values(), dtype=float, count=len(con.terms))
            order = np.argsort(idx)
            self.rows.append((idx[order], coefs[order], con.sense, con.rhs, con.tag))
        self._dense = None
        self._highs = None

    # -- LP backends --------------------------------------------------------

    def _dense_form(self):
        if self._dense is None:
            a = np.zeros((len(self.rows), self.n))
            senses = []
            rhs = []
            for i, (idx, coefs, sense, b, _tag) in enumerate(self.rows):
                a[i, idx] = coefs
                senses.append(sense)
                rhs.append(b)
            self._dense = (a, senses, np.array(rhs))
        return self._dense

    def _highs_form(self):
        if self._highs is None:
            from scipy.sparse import csr_matrix

            ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
            for idx, coefs, sense, b, _tag in self.rows:
                if sense == EQ:
                    eq_rows.append((idx, coefs))
                    eq_rhs.append(b)
                elif sense == LE:
                    ub_rows.append((idx, coefs))
                    ub_rhs.append(b)
                else:
                    ub_rows.append((idx, -coefs))
                    ub_rhs.append(-b)

            def build(rows):
                data, indices, indptr = [], [], [0]
                for idx, coefs in rows:
                    indices.extend(idx.tolist())
                    data.extend(coefs.tolist())
                    indptr.append(len(indices))
                return csr_matrix((data, indices, indptr), shape=(len(rows), self.n))

            self._highs = (
                build(ub_rows) if ub_rows else None,
                np.array(ub_rhs),
                build(eq_rows) if eq_rows else None,
                np.array(eq_rhs),
            )
        return self._highs

    def pick_backend(self, requested: str) -> str:
        if requested != "auto":
            return requested
        return "dense" if self.n + len(self.rows) <= _DENSE_LIMIT else "highs"

    def solve_lp(self, lo, hi, backend: str):
        """Returns (status, x, objective) ignoring integrality."""
        if backend == "dense":
            from . import simplex

            a, senses, rhs = self._dense_form()
            status, x, obj = simplex.solve_lp(self.c, a, senses, rhs, lo, hi)
            if status == simplex.OPTIMAL:
                return OPTIMAL, x, obj + self.obj_const
            return (INFEASIBLE if status == simplex.INFEASIBLE else UNBOUNDED), None, None
        if backend == "highs":
            from scipy.optimize import linprog

            a_ub, b_ub, a_eq, b_eq = self._highs_form()
            res = linprog(
                self.c,
                A_ub=a_ub,
                b_ub=b_ub,
                A_eq=a_eq,
                b_eq=b_eq,
                bounds=np.column_stack([lo, hi]),
                method="highs",
            )
            if res.status == 0:
                return OPTIMAL, res.x, float(res.fun) + self.obj_const
            if res.status == 2:
                return INFEASIBLE, None, None
            if res.status == 3:
                return UNBOUNDED, None, None
            raise NumericalFailure(f"HiGHS LP failed: {res.message}")
        raise SolverError(f"unknown LP backend {backend!r}")

    # -- presolve: iterated activity-based bound tightening ------------------

    def tighten_bounds(self, lo, hi, max_passes=30):
        """Returns (feasible, lo, hi) with tightened copies."""
        lo = lo.copy()
        hi = hi.copy()
        for _ in range(max_passes):
            changed = False
            if np.any(lo > hi + 1e-9):
                return False, lo, hi
            for idx, coefs, sense, b, _tag in self.rows:
                l, h = lo[idx], hi[idx]
                term_min = np.where(coefs > 0, coefs * l, coefs * h)
                term_max = np.where(coefs > 0, coefs * h, coefs * l)
                min_act = term_min.sum()
                max_act = term_max.sum()
                if sense in (LE, EQ) and min_act > b + 1e-7:
                    return False, lo, hi
                if sense in (GE, EQ) and max_act < b - 1e-7:
                    return False, lo, hi
                # derive implied bounds per variable
                if sense in (LE, EQ) and math.isfinite(min_act):
                    resid = b - (min_act - term_min)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        cap = resid / coefs
                    for k in range(len(idx)):
                        j = idx[k]
                        if coefs[k] > 0 and cap[k] < hi[j] - 1e-9:
                            hi[j] = cap[k]
                            changed = True
                        elif coefs[k] < 0 and cap[k] > lo[j] + 1e-9:
                            lo[j] = cap[k]
                            changed = True
                if sense in (GE, EQ) and math.isfinite(max_act):
                    resid = b - (max_act - term_max)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        cap = resid / coefs
                    for k in range(len(idx)):
                        j = idx[k]
                        if coefs[k] > 0 and cap[k] > lo[j] + 1e-9:
                            lo[j] = cap[k]
                            changed = True
                        elif coefs[k] < 0 and cap[k] < hi[j] - 1e-9:
                            hi[j] = cap[k]
                            changed = True
            if changed:
                mask = self.integral
                lo[mask] = np.ceil(lo[mask] - 1e-6)
                hi[mask] = np.floor(hi[mask] + 1e-6)
            else:
                break
        if np.any(lo > hi + 1e-9):
            return False, lo, hi
        return True, lo, hi

    # -- verification ---------------------------------------------------------

    def max_violation(self, x) -> float:
        worst = 0.0
        for idx, coefs, sense, b, _tag in self.rows:
            act = float(coefs @ x[idx])
            if sense == LE:
                worst = max(worst, act - b)
            elif sense == GE:
                worst = max(worst, b - act)
            else:
                worst = max(worst, abs(act - b))
        worst = max(worst, float(np.max(self.lo - x, initial=0.0)))
        worst = max(worst, float(np.max(x - self.hi, initial=0.0)))
        return worst

    def objective_value(self, x) -> float:
        return float(self.c @ x) + self.obj_const


def solve_builtin(model: Model, options: SolveOptions | None = None) -> Solution:
    """Exact branch-and-bound.  Never returns a silently wrong answer: the
    incumbent is re-verified against every row before being reported."""
    options = options or SolveOptions()
    arrays = ModelArrays(model)
    backend = arrays.pick_backend(options.lp_backend)
    t0 = time.monotonic()
    deadline = t0 + options.time_limit if options.time_limit else None

    ok, lo0, hi0 = arrays.tighten_bounds(arrays.lo, arrays.hi)
    if not ok:
        return Solution(INFEASIBLE, stats={"nodes": 0, "lp_solves": 0})

    counter = 0
    heap = []  # (parent bound, counter, lo, hi)
    heapq.heappush(heap, (-math.inf, counter, lo0, hi0))
    incumbent = None
    inc_obj = math.inf
    nodes = 0
    lp_solves = 0
    hit_time_limit = False

    while heap:
        bound, _, lo, hi = heapq.heappop(heap)
        if bound >= inc_obj - options.gap_tol:
            continue
        # depth-first dive from this node
        while True:
            if deadline and time.monotonic() > deadline:
                hit_time_limit = True
                heap = []
                break
            nodes += 1
            status, x, obj = arrays.solve_lp(lo, hi, backend)
            lp_solves += 1
            if status == UNBOUNDED:
                if incumbent is None and nodes == 1:
                    return Solution(
                        UNBOUNDED, stats={"nodes": nodes, "lp_solves": lp_solves}
                    )
                break
            if status != OPTIMAL or obj >= inc_obj - options.gap_tol:
                break
            frac = np.abs(x - np.round(x))
            frac[~arrays.integral] = 0.0
            cand = np.where(frac > options.int_tol)[0]
            if len(cand) == 0:
                xi = x.copy()
                xi[arrays.integral] = np.round(xi[arrays.integral])
                obj_i = arrays.objective_value(xi)
                if obj_i < inc_obj - 1e-12:
                    inc_obj = obj_i
                    incumbent = xi
                break
            # most fractional, ties by lowest index
            j = int(cand[np.argmax(frac[cand])])
            floor_v = math.floor(x[j])
            up_lo = lo.copy()
            up_lo[j] = floor_v + 1
            counter += 1
            heapq.heappush(heap, (obj, counter, up_lo, hi.copy()))
            hi = hi.copy()
            hi[j] = floor_v

    elapsed = time.monotonic() - t0
    stats = {"nodes": nodes, "lp_solves": lp_solves, "time": elapsed, "backend": backend}
    if incumbent is None:
        return Solution(TIME_LIMIT if hit_time_limit else INFEASIBLE, stats=stats)

    violation = arrays.max_violation(incumbent)
    if violation > options.verify_tol * 10:
        raise NumericalFailure(
            f"incumbent violates a constraint by {violation:.3e}; refusing to report it"
        )
    status = TIME_LIMIT if hit_time_limit else OPTIMAL
    values = {v.name: float(incumbent[v.id]) for v in model.vars}
    return Solution(status, values, arrays.objective_value(incumbent), stats)
