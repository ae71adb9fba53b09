"""Exact branch-and-bound over the binary variables of a MilpModel.

Best-first search ordered by the LP relaxation bound, branching on the most
fractional binary.  Every node re-solves its relaxation from scratch with
the dense simplex; at desk scale (tens of binaries) this is fast enough and
keeps the search fully deterministic.
"""
from __future__ import annotations

import heapq
import math

from .model import FEAS_TOL, MilpError, MilpModel, MilpSolution, Status
from .simplex import INFEASIBLE, UNBOUNDED, solve_lp

DEFAULT_NODE_LIMIT = 100_000


def solve(model: MilpModel, node_limit: int = DEFAULT_NODE_LIMIT) -> MilpSolution:
    """Solve to proven optimality, or IterLimit after node_limit LP solves."""
    binaries = model.binary_ids()
    base_bounds = [(v.lb, v.ub) for v in model.vars]
    rows = [(r.coefs, r.sense, r.rhs) for r in model.rows]

    def relax(fixings: dict):
        bounds = list(base_bounds)
        for vid, val in fixings.items():
            bounds[vid] = (float(val), float(val))
        return solve_lp(bounds, rows, model.objective, model.n_vars)

    incumbent = None
    incumbent_obj = math.inf
    nodes = 0
    counter = 0
    heap = []

    root = relax({})
    nodes += 1
    if root.status == INFEASIBLE:
        return MilpSolution(Status.INFEASIBLE, nodes=nodes)
    if root.status == UNBOUNDED:
        raise MilpError("LP relaxation is unbounded; MILP is ill-posed")
    heapq.heappush(heap, (root.objective, counter, {}, root))

    while heap:
        bound, _, fixings, res = heapq.heappop(heap)
        if bound >= incumbent_obj - 1e-9:
            continue
        frac_vid, frac_dist = -1, -1.0
        for vid in binaries:
            if vid in fixings:
                continue
            val = res.x[vid]
            dist = min(val, 1.0 - val)
            if dist > FEAS_TOL and dist > frac_dist + 1e-15:
                frac_vid, frac_dist = vid, dist
        if frac_vid < 0:
            # integral within tolerance; keep LP values so the assignment
            # satisfies the stored rows exactly as solved
            if res.objective < incumbent_obj - 1e-12:
                incumbent, incumbent_obj = res.x, res.objective
            continue
        for val in (0.0, 1.0):
            if nodes >= node_limit:
                return _limit_result(model, incumbent, incumbent_obj, nodes)
            child_fix = dict(fixings)
            child_fix[frac_vid] = val
            child = relax(child_fix)
            nodes += 1
            if child.status == INFEASIBLE:
                continue
            if child.status == UNBOUNDED:
                raise MilpError("LP relaxation is unbounded; MILP is ill-posed")
            if child.objective < incumbent_obj - 1e-9:
                counter += 1
                heapq.heappush(heap, (child.objective, counter, child_fix, child))

    if incumbent is None:
        return MilpSolution(Status.INFEASIBLE, nodes=nodes)
    return MilpSolution(Status.OPTIMAL,
                        {v.vid: float(incumbent[v.vid]) for v in model.vars},
                        incumbent_obj, nodes)


def _limit_result(model, incumbent, incumbent_obj, nodes) -> MilpSolution:
    if incumbent is None:
        return MilpSolution(Status.ITER_LIMIT, nodes=nodes)
    return MilpSolution(Status.ITER_LIMIT,
                        {v.vid: float(incumbent[v.vid]) for v in model.vars},
                        incumbent_obj, nodes)
