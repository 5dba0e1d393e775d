"""Dense two-phase primal simplex for desk-scale LP relaxations.

Pivoting uses Dantzig's rule with a switch to Bland's rule (which cannot
cycle) after a stall, so termination is guaranteed.  Problems are given as

    minimize c @ x  subject to  A x (<=|=|>=) b,  lo <= x <= hi

with per-variable bounds that may be infinite.  Variables are internally
shifted/split to non-negative standard form; finite upper bounds become
explicit rows.  Intended for models up to a few thousand rows; larger
relaxations should go through the HiGHS backend.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_TOL = 1e-9
_STALL_LIMIT = 200  # iterations without improvement before Bland's rule


def solve_lp(c, rows, senses, rhs, lo, hi, max_iter=200000):
    """Solve the LP, returning (status, x, objective).

    rows is a dense 2-D array (n_rows x n_vars); senses is a sequence of
    '<=', '=', '>='.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(rows, dtype=float).reshape(len(senses), len(c))
    b = np.asarray(rhs, dtype=float).copy()
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(c)

    # -- substitution to non-negative variables ------------------------------
    # col_map[j] = (kind, data): kind 'shift' -> x = lo + x', 'mirror' ->
    # x = hi - x', 'split' -> x = xp - xn (two columns).
    cols = []
    col_kind = []
    shift_const = np.zeros(len(b))
    obj_const = 0.0
    new_cols = []
    for j in range(n):
        if lo[j] > hi[j] + 1e-12:
            return INFEASIBLE, None, None
        if math.isfinite(lo[j]):
            new_cols.append(a[:, j])
            cols.append(j)
            col_kind.append(("shift", lo[j]))
            if lo[j] != 0.0:
                shift_const += a[:, j] * lo[j]
                obj_const += c[j] * lo[j]
        elif math.isfinite(hi[j]):
            new_cols.append(-a[:, j])
            cols.append(j)
            col_kind.append(("mirror", hi[j]))
            shift_const += a[:, j] * hi[j]
            obj_const += c[j] * hi[j]
        else:
            new_cols.append(a[:, j])
            cols.append(j)
            col_kind.append(("free_pos", 0.0))
            new_cols.append(-a[:, j])
            cols.append(j)
            col_kind.append(("free_neg", 0.0))
    a2 = np.column_stack(new_cols) if new_cols else np.zeros((len(b), 0))
    b2 = b - shift_const
    c2 = []
    for k, (kind, _) in enumerate(col_kind):
        j = cols[k]
        if kind in ("shift", "free_pos"):
            c2.append(c[j])
        else:
            c2.append(-c[j])
    c2 = np.asarray(c2, dtype=float)
    senses2 = list(senses)

    # upper-bound rows for shifted/mirrored variables with two finite bounds
    for k, (kind, base) in enumerate(col_kind):
        j = cols[k]
        if kind == "shift" and math.isfinite(hi[j]) and hi[j] > lo[j]:
            row = np.zeros(a2.shape[1])
            row[k] = 1.0
            a2 = np.vstack([a2, row])
            b2 = np.append(b2, hi[j] - lo[j])
            senses2.append("<=")
        elif kind == "shift" and hi[j] == lo[j]:
            row = np.zeros(a2.shape[1])
            row[k] = 1.0
            a2 = np.vstack([a2, row])
            b2 = np.append(b2, 0.0)
            senses2.append("<=")

    status, xstd, obj = _two_phase(c2, a2, b2, senses2, max_iter)
    if status != OPTIMAL:
        return status, None, None

    x = np.zeros(n)
    for k, (kind, base) in enumerate(col_kind):
        j = cols[k]
        if kind == "shift":
            x[j] = base + xstd[k]
        elif kind == "mirror":
            x[j] = base - xstd[k]
        elif kind == "free_pos":
            x[j] += xstd[k]
        else:
            x[j] -= xstd[k]
    return OPTIMAL, x, obj + obj_const


def _two_phase(c, a, b, senses, max_iter):
    m, n = a.shape
    # normalize rhs to be non-negative
    a = a.copy()
    b = b.copy()
    senses = list(senses)
    for i in range(m):
        if b[i] < 0:
            a[i] = -a[i]
            b[i] = -b[i]
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]

    slack_cols = []
    art_rows = []
    extra = []
    for i, s in enumerate(senses):
        if s == "<=":
            col = np.zeros(m)
            col[i] = 1.0
            extra.append(col)
            slack_cols.append(("slack", i))
        elif s == ">=":
            col = np.zeros(m)
            col[i] = -1.0
            extra.append(col)
            slack_cols.append(("surplus", i))
            art_rows.append(i)
        else:
            art_rows.append(i)
    n_slack = len(extra)
    art_cols = []
    for i in art_rows:
        col = np.zeros(m)
        col[i] = 1.0
        extra.append(col)
        art_cols.append(n + n_slack + len(art_cols))

    full = np.hstack([a, np.column_stack(extra)]) if extra else a.copy()
    total = full.shape[1]
    is_art = np.zeros(total, dtype=bool)
    for j in art_cols:
        is_art[j] = True

    # initial basis: slack column for <= rows, artificial otherwise
    basis = np.empty(m, dtype=int)
    slack_of_row = {}
    col_idx = n
    for kind, i in slack_cols:
        slack_of_row[(kind, i)] = col_idx
        col_idx += 1
    ai = iter(art_cols)
    for i, s in enumerate(senses):
        if s == "<=":
            basis[i] = slack_of_row[("slack", i)]
        else:
            basis[i] = next(ai)

    tableau = np.hstack([full, b.reshape(-1, 1)])

    # phase 1
    if art_cols:
        cost1 = np.zeros(total)
        cost1[art_cols] = 1.0
        z1, ok = _run_simplex(tableau, basis, cost1, max_iter, forbid=None)
        if not ok:
            raise NumericalFailure("simplex iteration limit reached in phase 1")
        if z1 > 1e-7:
            return INFEASIBLE, None, None
        # pivot zero-level artificials out of the basis where possible
        for i in range(m):
            if is_art[basis[i]]:
                row = tableau[i, :total]
                cand = np.where((np.abs(row) > _TOL) & ~is_art)[0]
                if len(cand):
                    _pivot(tableau, basis, i, cand[0])
        # any artificial still basic sits in a redundant row; freeze it at 0

    cost2 = np.zeros(total)
    cost2[:n] = c
    z2, ok = _run_simplex(tableau, basis, cost2, max_iter, forbid=is_art)
    if not ok:
        raise NumericalFailure("simplex iteration limit reached in phase 2")
    if z2 is None:
        return UNBOUNDED, None, None
    x = np.zeros(total)
    x[basis] = tableau[:, -1]
    return OPTIMAL, x[:n], float(cost2 @ x)


def _pivot(tableau, basis, r, j):
    tableau[r] /= tableau[r, j]
    col = tableau[:, j].copy()
    col[r] = 0.0
    tableau -= np.outer(col, tableau[r])
    basis[r] = j


def _run_simplex(tableau, basis, cost, max_iter, forbid):
    """Primal simplex on a feasible tableau.  Returns (objective, finished).

    objective None signals unboundedness.
    """
    m = tableau.shape[0]
    total = tableau.shape[1] - 1
    bland = False
    stall = 0
    last_obj = math.inf
    for it in range(max_iter):
        y = cost[basis] @ tableau[:, :total]
        reduced = cost - y
        if forbid is not None:
            reduced = reduced.copy()
            reduced[forbid] = math.inf  # never re-enter artificial columns
        enterable = np.where(reduced < -_TOL)[0]
        if len(enterable) == 0:
            return float(cost[basis] @ tableau[:, -1]), True
        if bland:
            j = enterable[0]
        else:
            j = enterable[np.argmin(reduced[enterable])]
        col = tableau[:, j]
        if forbid is not None:
            # kick any zero-level basic artificial out first so it can never
            # turn positive again
            art_basic = np.where(forbid[basis] & (np.abs(col) > _TOL))[0]
            if len(art_basic):
                _pivot(tableau, basis, art_basic[0], j)
                continue
        pos = np.where(col > _TOL)[0]
        if len(pos) == 0:
            return None, True
        ratios = tableau[pos, -1] / col[pos]
        best = np.min(ratios)
        ties = pos[ratios <= best + 1e-12]
        if bland:
            r = ties[np.argmin(basis[ties])]
        else:
            r = ties[0]
        _pivot(tableau, basis, r, j)
        obj = float(cost[basis] @ tableau[:, -1])
        if obj < last_obj - 1e-12:
            last_obj = obj
            stall = 0
        else:
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True
    return 0.0, False
