"""Solver-agnostic MILP model container.

A model is append-only while being built: variables and constraint rows are
added, never removed or reordered, so identical construction code yields an
identical model and (with a deterministic solver) an identical solution.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"

LE, EQ, GE = "<=", "=", ">="

#: Tolerance for replaying a solution against the stored constraints, and
#: for calling a binary integral.
FEAS_TOL = 1e-6


class MilpError(Exception):
    pass


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    ITER_LIMIT = "IterLimit"


@dataclass
class _Var:
    vid: int
    name: str
    kind: str
    lb: float
    ub: float


@dataclass
class _Row:
    coefs: dict  # var id -> coefficient
    sense: str
    rhs: float
    name: str = ""


class MilpModel:
    def __init__(self):
        self.vars: list[_Var] = []
        self.rows: list[_Row] = []
        self.objective: dict[int, float] = {}

    # -- construction --------------------------------------------------

    def add_var(self, name: str = "", lb: float = -math.inf,
                ub: float = math.inf, kind: str = CONTINUOUS) -> int:
        if kind == BINARY:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
            if lb > ub:
                raise MilpError(f"binary variable {name!r} has empty bounds")
        elif kind != CONTINUOUS:
            raise MilpError(f"unknown variable kind {kind!r}")
        if lb > ub:
            raise MilpError(f"variable {name!r} has lb {lb} > ub {ub}")
        vid = len(self.vars)
        self.vars.append(_Var(vid, name or f"x{vid}", kind, lb, ub))
        return vid

    def add_binary(self, name: str = "") -> int:
        return self.add_var(name, 0.0, 1.0, BINARY)

    def add_row(self, coefs: dict, sense: str, rhs: float, name: str = "") -> int:
        if sense not in (LE, EQ, GE):
            raise MilpError(f"unknown sense {sense!r}")
        for vid in coefs:
            if not 0 <= vid < len(self.vars):
                raise MilpError(f"row {name!r} references undeclared variable {vid}")
        self.rows.append(_Row(dict(coefs), sense, float(rhs), name))
        return len(self.rows) - 1

    def add_objective_term(self, vid: int, coef: float) -> None:
        if not 0 <= vid < len(self.vars):
            raise MilpError(f"objective references undeclared variable {vid}")
        self.objective[vid] = self.objective.get(vid, 0.0) + float(coef)

    def fix_var(self, vid: int, value: float) -> None:
        v = self.vars[vid]
        v.lb = v.ub = float(value)

    # -- queries ---------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return len(self.vars)

    @property
    def n_binary(self) -> int:
        return sum(1 for v in self.vars if v.kind == BINARY)

    def binary_ids(self) -> list[int]:
        return [v.vid for v in self.vars if v.kind == BINARY]

    def row_activity(self, row: _Row, x: np.ndarray) -> float:
        return float(sum(c * x[vid] for vid, c in row.coefs.items()))

    def check_solution(self, x, tol: float = FEAS_TOL) -> list:
        """Replay x against every constraint; return the violations."""
        x = np.asarray(x, dtype=float)
        bad = []
        for v in self.vars:
            if x[v.vid] < v.lb - tol or x[v.vid] > v.ub + tol:
                bad.append(f"var {v.name}: {x[v.vid]} outside [{v.lb}, {v.ub}]")
            if v.kind == BINARY and min(abs(x[v.vid]), abs(x[v.vid] - 1.0)) > tol:
                bad.append(f"binary {v.name} = {x[v.vid]} not integral")
        for r in self.rows:
            lhs = self.row_activity(r, x)
            if r.sense == LE and lhs > r.rhs + tol:
                bad.append(f"row {r.name}: {lhs} </= {r.rhs}")
            elif r.sense == GE and lhs < r.rhs - tol:
                bad.append(f"row {r.name}: {lhs} >/= {r.rhs}")
            elif r.sense == EQ and abs(lhs - r.rhs) > tol:
                bad.append(f"row {r.name}: {lhs} != {r.rhs}")
        return bad

    def objective_value(self, x) -> float:
        return float(sum(c * x[vid] for vid, c in self.objective.items()))


@dataclass
class MilpSolution:
    status: Status
    assignment: dict = field(default_factory=dict)
    objective: float = math.nan
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def value(self, vid: int) -> float:
        return self.assignment[vid]

    def values(self, vids) -> np.ndarray:
        return np.array([self.assignment[v] for v in vids], dtype=float)
