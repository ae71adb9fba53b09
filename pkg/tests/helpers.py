"""Shared generators and oracles for the test suite.

Random formulas and traces are drawn on a coarse value grid (multiples of
0.25) so predicate membership never lands inside the encoder's strictness
band and verdicts are exact.
"""
from __future__ import annotations

import numpy as np

from mtlmas.mtl import (Always, And, Atom, AtomTable, Eventually,
                        HalfSpaceConj, Interval, Not, Or, Trace, TrueF,
                        Until, UNBOUNDED, eval_weak, rewrite_at)
from mtlmas.milp import MilpModel, AtomBinder, encode_formula


def grid_atom_table(n_atoms: int = 4) -> AtomTable:
    """Scalar threshold atoms p0..p{n-1} on a one-dimensional leader trace."""
    table = AtomTable()
    thresholds = [-0.75, -0.25, 0.25, 0.75, 1.25, -1.25]
    for i in range(n_atoms):
        b = thresholds[i % len(thresholds)]
        sign = 1.0 if i % 2 == 0 else -1.0
        table.add(f"p{i}", HalfSpaceConj(agent=0, rows=(((sign,), sign * b),)))
    return table


def random_trace(rng: np.random.Generator, horizon: int, ts: float = 0.5) -> Trace:
    vals = rng.integers(-8, 9, size=(horizon + 1, 1)) * 0.25
    return Trace(vals.astype(float), ts, dim=1, n_followers=0)


def random_interval(rng: np.random.Generator, allow_unbounded: bool = False) -> Interval:
    lo = int(rng.integers(0, 4))
    if allow_unbounded and rng.integers(0, 4) == 0:
        return Interval(lo, UNBOUNDED)
    return Interval(lo, lo + int(rng.integers(0, 5)))


def random_formula(rng: np.random.Generator, names, depth: int,
                   allow_unbounded: bool = False):
    if depth <= 0 or rng.integers(0, 5) == 0:
        k = int(rng.integers(0, len(names) + 1))
        return TrueF() if k == len(names) else Atom(names[k])
    op = int(rng.integers(0, 6))
    sub = lambda: random_formula(rng, names, depth - 1, allow_unbounded)
    if op == 0:
        return Not(sub())
    if op == 1:
        return And(sub(), sub())
    if op == 2:
        return Or(sub(), sub())
    if op == 3:
        return Until(sub(), sub(), random_interval(rng, allow_unbounded))
    if op == 4:
        return Eventually(sub(), random_interval(rng, allow_unbounded))
    return Always(sub(), random_interval(rng, allow_unbounded))


def assign_from_trace(trace: Trace, atoms: AtomTable):
    """Weak-view assignment: in-range atoms from samples, beyond-range true."""
    def assign(key):
        name, idx = key
        if idx > trace.horizon:
            return True
        return atoms.holds(name, trace, idx)
    return assign


def mini_scenario_dict(**overrides) -> dict:
    """Single-follower world small enough for second-scale loop tests."""
    doc = {
        "name": "mini",
        "seed": 0,
        "ts": 0.5,
        "horizon": 8,
        "eta": 4.0,
        "v_t": 1.0,
        "r_g": 5.0,
        "r": 5.0,
        "x_g": [0.0, 0.0, 0.0],
        "step_cap": 200,
        "solver": "highs",
        "mip_rel_gap": 0.05,
        "leader": {"position": [0.0, -5.0, 5.0], "u_min": -100.0,
                   "u_max": 100.0},
        "followers": [
            {"position": [-16.0, 0.0, 0.0], "k": 0.2, "d_bar": 0.02}],
        "regions": {
            "D": {"center": [0.0, 0.0, 7.0],
                  "half_extents": [20.0, 20.0, 3.0]}},
        "phi_p": "G inD",
    }
    doc.update(overrides)
    return doc


def clamped_feasibility(formula, trace: Trace, atoms: AtomTable, solver) -> bool:
    """Encode the formula over output variables clamped to the trace.

    Feasibility of the resulting MILP is the dual route to eval_weak.
    """
    model = MilpModel()
    y_vars = {}
    for j in range(trace.horizon + 1):
        y_vars[j] = [model.add_var(f"y{j}_{k}") for k in range(trace.dim)]
        for k in range(trace.dim):
            model.fix_var(y_vars[j][k], float(trace.samples[j, k]))
    bf = rewrite_at(formula, 0, -1, trace, atoms, horizon=trace.horizon)
    binder = AtomBinder(atoms, y_vars, {})
    encode_formula(model, bf, binder)
    return solver.solve(model).optimal
