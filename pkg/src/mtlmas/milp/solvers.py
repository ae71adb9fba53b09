"""Solver interface: the built-in exact solver and external adapters.

The built-in branch-and-bound is the reference solver and handles desk-scale
models (up to roughly sixty binaries) exactly and deterministically.  The
receding-horizon scenario MILPs are an order of magnitude larger, so the
synthesis loop prefers the HiGHS solver shipped with scipy when it is
importable; "auto" selects it for large models and the built-in otherwise.
"""
from __future__ import annotations

import math

import numpy as np

from . import bnb
from .model import GE, LE, MilpModel, MilpSolution, MilpError, Status

#: Primal feasibility tolerance requested from HiGHS.  Tighter than the
#: encoder's strictness gap so planned predicate hits and misses stay
#: separated after execution.
HIGHS_FEAS_TOL = 1e-9

_BUILTIN_BINARY_LIMIT = 60


class BranchAndBoundSolver:
    name = "builtin"

    def __init__(self, node_limit: int = bnb.DEFAULT_NODE_LIMIT):
        self.node_limit = node_limit

    def solve(self, model: MilpModel) -> MilpSolution:
        return bnb.solve(model, self.node_limit)


class HighsSolver:
    """scipy.optimize.milp (HiGHS) behind the same model contract.

    mip_rel_gap trades proof-of-optimality effort for speed; with identical
    models and options HiGHS is deterministic either way.
    """

    name = "highs"

    def __init__(self, node_limit: int | None = None,
                 mip_rel_gap: float = 0.0):
        self.node_limit = node_limit
        self.mip_rel_gap = mip_rel_gap

    def solve(self, model: MilpModel) -> MilpSolution:
        import warnings

        from scipy import optimize, sparse

        n = model.n_vars
        c = np.zeros(n)
        for vid, coef in model.objective.items():
            c[vid] += coef
        integrality = np.zeros(n)
        for vid in model.binary_ids():
            integrality[vid] = 1
        lb = np.array([v.lb for v in model.vars])
        ub = np.array([v.ub for v in model.vars])

        data, rows_ix, cols_ix, c_lo, c_hi = [], [], [], [], []
        for i, r in enumerate(model.rows):
            for vid, coef in r.coefs.items():
                rows_ix.append(i)
                cols_ix.append(vid)
                data.append(coef)
            if r.sense == LE:
                c_lo.append(-math.inf)
                c_hi.append(r.rhs)
            elif r.sense == GE:
                c_lo.append(r.rhs)
                c_hi.append(math.inf)
            else:
                c_lo.append(r.rhs)
                c_hi.append(r.rhs)
        constraints = None
        if model.rows:
            a = sparse.csc_matrix((data, (rows_ix, cols_ix)),
                                  shape=(len(model.rows), n))
            constraints = optimize.LinearConstraint(a, c_lo, c_hi)

        options = {"presolve": True,
                   "primal_feasibility_tolerance": HIGHS_FEAS_TOL,
                   "mip_rel_gap": self.mip_rel_gap}
        if self.node_limit is not None:
            options["node_limit"] = self.node_limit
        with warnings.catch_warnings():
            # scipy forwards unrecognized HiGHS options verbatim with a
            # warning; the feasibility tolerance is such an option
            warnings.simplefilter("ignore", RuntimeWarning)
            res = optimize.milp(c=c, constraints=constraints,
                                integrality=integrality,
                                bounds=optimize.Bounds(lb, ub),
                                options=options)

        if res.status == 2:
            return MilpSolution(Status.INFEASIBLE)
        if res.status == 1 or res.x is None:
            return MilpSolution(Status.ITER_LIMIT)
        if res.status != 0:
            raise MilpError(f"HiGHS failed: {res.message}")
        assignment = {v.vid: float(res.x[v.vid]) for v in model.vars}
        return MilpSolution(Status.OPTIMAL, assignment, float(res.fun),
                            int(getattr(res, "mip_node_count", 0) or 0))


def highs_available() -> bool:
    try:
        from scipy import optimize  # noqa: F401
        return hasattr(optimize, "milp")
    except ImportError:
        return False


def make_solver(name: str = "auto", node_limit: int | None = None,
                mip_rel_gap: float = 0.0):
    """Pick a solver: 'builtin', 'highs', or 'auto'."""
    if name == "builtin":
        return BranchAndBoundSolver(node_limit or bnb.DEFAULT_NODE_LIMIT)
    if name == "highs":
        if not highs_available():
            raise MilpError("scipy.optimize.milp is not available")
        return HighsSolver(node_limit, mip_rel_gap)
    if name == "auto":
        return _AutoSolver(node_limit, mip_rel_gap)
    raise MilpError(f"unknown solver {name!r}")


class _AutoSolver:
    """Built-in for desk-scale models, HiGHS for anything larger."""

    name = "auto"

    def __init__(self, node_limit: int | None = None,
                 mip_rel_gap: float = 0.0):
        self.node_limit = node_limit
        self._highs = (HighsSolver(node_limit, mip_rel_gap)
                       if highs_available() else None)

    def solve(self, model: MilpModel) -> MilpSolution:
        if self._highs is not None and model.n_binary > _BUILTIN_BINARY_LIMIT:
            return self._highs.solve(model)
        return BranchAndBoundSolver(self.node_limit or bnb.DEFAULT_NODE_LIMIT).solve(model)
