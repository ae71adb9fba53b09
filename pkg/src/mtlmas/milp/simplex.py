"""Dense two-phase primal simplex with Bland's rule.

Built for desk-scale LP relaxations: deterministic, cycle-proof, and exact
enough to certify MILP optimality at 1e-6.  The pivot kernel is compiled
(Cython) when available and falls back to numpy; both produce bit-identical
iterates.  Set MTLMAS_FORCE_PY_KERNEL=1 to force the fallback.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .model import GE, LE, MilpError

if os.environ.get("MTLMAS_FORCE_PY_KERNEL"):
    from . import _pivot_py as _kernel
    KERNEL = "numpy"
else:
    try:
        from . import _pivot_cy as _kernel  # type: ignore[attr-defined]
        KERNEL = "compiled"
    except ImportError:
        from . import _pivot_py as _kernel
        KERNEL = "numpy"

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None = None  # values of the original variables
    objective: float = math.nan
    iterations: int = 0


@dataclass
class _Shift:
    """How one original variable maps into the standard-form column space."""
    kind: str            # "fixed" | "lower" | "upper" | "free"
    value: float = 0.0   # constant (fixed), lb (lower) or ub (upper)
    col: int = -1
    col_neg: int = -1    # second column for free variables


def solve_lp(bounds, rows, objective: dict, n_vars: int,
             max_iters: int | None = None) -> LpResult:
    """Minimize c.x subject to rows and variable bounds.

    bounds: list of (lb, ub) per variable (may be infinite; lb == ub fixes
    the variable and eliminates it).  rows: iterable of (coefs dict, sense,
    rhs).  objective: var id -> coefficient.
    """
    shifts: list[_Shift] = []
    ncols = 0
    ub_rows = []  # (col, ub - lb) residual upper bounds
    for vid in range(n_vars):
        lb, ub = bounds[vid]
        if lb > ub + 1e-12:
            return LpResult(INFEASIBLE)
        if lb == ub:
            shifts.append(_Shift("fixed", lb))
        elif lb > -math.inf:
            shifts.append(_Shift("lower", lb, col=ncols))
            if ub < math.inf:
                ub_rows.append((ncols, ub - lb))
            ncols += 1
        elif ub < math.inf:
            shifts.append(_Shift("upper", ub, col=ncols))
            ncols += 1
        else:
            shifts.append(_Shift("free", 0.0, col=ncols, col_neg=ncols + 1))
            ncols += 2

    def expand(coefs: dict):
        """Rewrite a row over original vars into (dense cols, rhs shift)."""
        dense = np.zeros(ncols)
        shift = 0.0
        for vid, a in coefs.items():
            s = shifts[vid]
            if s.kind == "fixed":
                shift += a * s.value
            elif s.kind == "lower":
                dense[s.col] += a
                shift += a * s.value
            elif s.kind == "upper":
                dense[s.col] -= a
                shift += a * s.value
            else:
                dense[s.col] += a
                dense[s.col_neg] -= a
        return dense, shift

    a_rows, senses, rhs = [], [], []
    for coefs, sense, b in rows:
        dense, shift = expand(coefs)
        a_rows.append(dense)
        senses.append(sense)
        rhs.append(b - shift)
    for col, res in ub_rows:
        dense = np.zeros(ncols)
        dense[col] = 1.0
        a_rows.append(dense)
        senses.append(LE)
        rhs.append(res)

    cost = np.zeros(ncols)
    for vid, a in objective.items():
        s = shifts[vid]
        if s.kind == "lower":
            cost[s.col] += a
        elif s.kind == "upper":
            cost[s.col] -= a
        elif s.kind == "free":
            cost[s.col] += a
            cost[s.col_neg] -= a
    obj_shift = sum(a * shifts[vid].value for vid, a in objective.items()
                    if shifts[vid].kind in ("fixed", "lower", "upper"))

    m = len(a_rows)
    if m == 0:
        # no rows: every standard-form column is unbounded above (finite
        # two-sided bounds produce a residual row), so any negative cost
        # coordinate means an unbounded objective.
        if np.any(cost < -PIVOT_TOL):
            return LpResult(UNBOUNDED)
        x_std = np.zeros(ncols)
        return LpResult(OPTIMAL, _unshift(shifts, x_std, n_vars),
                        float(cost @ x_std + obj_shift), 0)

    A = np.vstack(a_rows) if m else np.zeros((0, ncols))
    b = np.asarray(rhs, dtype=float)
    senses = list(senses)

    # normalize rhs >= 0
    for i in range(m):
        if b[i] < 0.0:
            A[i] = -A[i]
            b[i] = -b[i]
            if senses[i] == LE:
                senses[i] = GE
            elif senses[i] == GE:
                senses[i] = LE

    n_slack = sum(1 for s in senses if s in (LE, GE))
    n_art = sum(1 for s in senses if s != LE)
    total = ncols + n_slack + n_art

    T = np.zeros((m + 1, total + 1))
    T[:m, :ncols] = A
    T[:m, total] = b
    basis = np.zeros(m, dtype=np.int64)
    art_cols = []
    sj = ncols
    aj = ncols + n_slack
    for i, sense in enumerate(senses):
        if sense == LE:
            T[i, sj] = 1.0
            basis[i] = sj
            sj += 1
        elif sense == GE:
            T[i, sj] = -1.0
            sj += 1
            T[i, aj] = 1.0
            basis[i] = aj
            art_cols.append(aj)
            aj += 1
        else:
            T[i, aj] = 1.0
            basis[i] = aj
            art_cols.append(aj)
            aj += 1

    allowed = np.ones(total, dtype=np.uint8)
    if max_iters is None:
        max_iters = 200 * (m + total) + 1000
    iters = 0

    def run_phase() -> int:
        nonlocal iters
        while True:
            c = _kernel.entering_bland(T[m, :total], allowed, PIVOT_TOL)
            if c < 0:
                return -1
            r = _kernel.leaving_bland(np.ascontiguousarray(T[:m, c]),
                                      np.ascontiguousarray(T[:m, total]),
                                      basis, PIVOT_TOL)
            if r < 0:
                return c
            _kernel.pivot(T, int(r), int(c))
            basis[r] = c
            iters += 1
            if iters > max_iters:
                raise MilpError(f"simplex exceeded {max_iters} iterations")

    if art_cols:
        # phase 1: minimize the artificial sum; its reduced-cost row is the
        # negated sum of the rows where an artificial starts basic.
        art_rows = [i for i in range(m) if basis[i] in art_cols]
        T[m, :] = -T[art_rows, :].sum(axis=0)
        for col in art_cols:
            T[m, col] = 0.0
        run_phase()
        if -T[m, total] > FEAS_TOL:
            return LpResult(INFEASIBLE, iterations=iters)
        art_set = set(art_cols)
        allowed[list(art_cols)] = 0
        # pivot basic artificials out; a row with no real pivot is redundant
        drop = []
        for i in range(m):
            if basis[i] in art_set:
                row = T[i, :total]
                cand = np.nonzero((np.abs(row) > PIVOT_TOL) & (allowed != 0))[0]
                if cand.size:
                    _kernel.pivot(T, i, int(cand[0]))
                    basis[i] = int(cand[0])
                else:
                    drop.append(i)
        if drop:
            keep = [i for i in range(m) if i not in set(drop)]
            T = np.ascontiguousarray(np.vstack([T[keep, :], T[m:, :]]))
            basis = basis[keep]
            m = len(keep)

    # phase 2 reduced costs for the current basis
    full_cost = np.zeros(total)
    full_cost[:ncols] = cost
    T[m, :total] = full_cost - full_cost[basis] @ T[:m, :total]
    T[m, total] = -full_cost[basis] @ T[:m, total]
    unb = run_phase()
    if unb >= 0:
        return LpResult(UNBOUNDED, iterations=iters)

    x_std = np.zeros(total)
    x_std[basis] = T[:m, total]
    if art_cols and float(x_std[list(art_cols)].sum()) > FEAS_TOL:
        return LpResult(INFEASIBLE, iterations=iters)
    objective_value = float(full_cost @ x_std + obj_shift)
    return LpResult(OPTIMAL, _unshift(shifts, x_std, n_vars),
                    objective_value, iters)


def _unshift(shifts, x_std: np.ndarray, n_vars: int) -> np.ndarray:
    x = np.zeros(n_vars)
    for vid in range(n_vars):
        s = shifts[vid]
        if s.kind == "fixed":
            x[vid] = s.value
        elif s.kind == "lower":
            x[vid] = s.value + x_std[s.col]
        elif s.kind == "upper":
            x[vid] = s.value - x_std[s.col]
        else:
            x[vid] = x_std[s.col] - x_std[s.col_neg]
    return x
