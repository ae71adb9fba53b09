"""MILP encodings: discrete dynamics, time-stamped formulas, L1 objective.

Formula encoding is the monotone big-M construction: the formula is put in
negation normal form, every literal (a predicate or its negation, at one
time index) gets big-M indicator rows of the matching polarity, and the
and/or structure above the literals is asserted directly; disjunctions
under the asserted conjunctive spine become set-covering rows.  A feasible
point therefore weakly satisfies the formula, and with the trajectory
variables clamped to a concrete trace, feasibility is exactly the weak
verdict (the dual route used by the tests).

Strict predicate violation is imposed with a gap EPS_STRICT, so each
predicate carries a dead band of that width just above its boundary; the
synthesis loop keeps executed samples clear of it by an order of magnitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..mtl.formula import HalfSpaceConj, Proximity
from ..mtl.rewrite import BAnd, BAtom, BFalse, BNot, BOr, BTrue
from .model import EQ, GE, LE, MilpError, MilpModel

#: Strictness gap for the "violated" side of a predicate; MILPs cannot
#: express strict inequalities.
EPS_STRICT = 1e-6

#: Headroom factor applied to big-M values derived from variable bounds.
BIG_M_MARGIN = 1.1


@dataclass
class DynamicsHandles:
    """Variable ids created by encode_dynamics, keyed by absolute index."""

    x_vars: dict = field(default_factory=dict)   # j -> [vid] state
    u_vars: dict = field(default_factory=dict)   # j -> [vid] input
    y_vars: dict = field(default_factory=dict)   # j -> [vid] output


def encode_dynamics(model: MilpModel, a_d: np.ndarray, b_d: np.ndarray,
                    c_d: np.ndarray, x_init: np.ndarray, n_steps: int,
                    u_bounds, start: int = 0,
                    pos_bounds=None) -> DynamicsHandles:
    """Chain x^{j+1} = Ad x^j + Bd u^j, y^j = Cd x^j over j = start..start+N-1.

    x^{start} is fixed to x_init; inputs are box-bounded by u_bounds =
    (u_min, u_max).  pos_bounds, when given, bounds every output variable
    (needed to size big-M values for predicates on y).
    """
    a_d = np.asarray(a_d, dtype=float)
    b_d = np.asarray(b_d, dtype=float)
    c_d = np.asarray(c_d, dtype=float)
    x_init = np.asarray(x_init, dtype=float)
    nx = a_d.shape[0]
    if a_d.shape != (nx, nx):
        raise MilpError(f"A must be square, got {a_d.shape}")
    if b_d.shape[0] != nx:
        raise MilpError(f"B has {b_d.shape[0]} rows, expected {nx}")
    if c_d.shape[1] != nx:
        raise MilpError(f"C has {c_d.shape[1]} columns, expected {nx}")
    if x_init.shape != (nx,):
        raise MilpError(f"x_init has shape {x_init.shape}, expected ({nx},)")
    nu = b_d.shape[1]
    ny = c_d.shape[0]
    u_min, u_max = (np.asarray(u_bounds[0], dtype=float),
                    np.asarray(u_bounds[1], dtype=float))
    if u_min.shape != (nu,) or u_max.shape != (nu,):
        raise MilpError("u_bounds must match the input dimension")
    if n_steps < 1:
        raise MilpError("n_steps must be >= 1")
    if pos_bounds is not None:
        y_lo = np.asarray(pos_bounds[0], dtype=float)
        y_hi = np.asarray(pos_bounds[1], dtype=float)
        if y_lo.shape != (ny,) or y_hi.shape != (ny,):
            raise MilpError("pos_bounds must match the output dimension")

    h = DynamicsHandles()
    for j in range(start, start + n_steps + 1):
        h.x_vars[j] = [model.add_var(f"x{j}_{k}") for k in range(nx)]
    for j in range(start, start + n_steps):
        h.u_vars[j] = [model.add_var(f"u{j}_{k}", float(u_min[k]), float(u_max[k]))
                       for k in range(nu)]
        if pos_bounds is None:
            h.y_vars[j] = [model.add_var(f"y{j}_{k}") for k in range(ny)]
        else:
            h.y_vars[j] = [model.add_var(f"y{j}_{k}", float(y_lo[k]), float(y_hi[k]))
                           for k in range(ny)]
    for k in range(nx):
        model.fix_var(h.x_vars[start][k], float(x_init[k]))

    for j in range(start, start + n_steps):
        xj, xn, uj = h.x_vars[j], h.x_vars[j + 1], h.u_vars[j]
        for k in range(nx):
            coefs = {xn[k]: 1.0}
            for kk in range(nx):
                if a_d[k, kk] != 0.0:
                    coefs[xj[kk]] = coefs.get(xj[kk], 0.0) - a_d[k, kk]
            for kk in range(nu):
                if b_d[k, kk] != 0.0:
                    coefs[uj[kk]] = coefs.get(uj[kk], 0.0) - b_d[k, kk]
            model.add_row(coefs, EQ, 0.0, f"dyn{j}_{k}")
        for k in range(ny):
            coefs = {h.y_vars[j][k]: 1.0}
            for kk in range(nx):
                if c_d[k, kk] != 0.0:
                    coefs[xj[kk]] = coefs.get(xj[kk], 0.0) - c_d[k, kk]
            model.add_row(coefs, EQ, 0.0, f"out{j}_{k}")
    return h


class AtomBinder:
    """Resolve a time-stamped atom into half-space rows over model variables.

    Region atoms on the leader and proximity atoms bind to the leader output
    variables of their index; atoms on followers evaluate against the
    precomputed follower position predictions and fold to constants.
    """

    def __init__(self, atoms, y_vars: dict, follower_pos: dict,
                 membership_tol: float = 0.0):
        self.atoms = atoms
        self.y_vars = y_vars
        self.follower_pos = follower_pos  # (follower, j) -> position vector
        self.membership_tol = membership_tol

    def _leader_y(self, index: int):
        try:
            return self.y_vars[index]
        except KeyError:
            raise MilpError(
                f"atom at index {index} is outside the encoded horizon") from None

    def bind(self, atom: BAtom):
        """Return ('const', bool) or ('rows', [(coefs, rhs)])."""
        desc = self.atoms[atom.name]
        if isinstance(desc, HalfSpaceConj):
            if desc.agent == 0:
                yv = self._leader_y(atom.index)
                return "rows", [({yv[k]: float(a[k]) for k in range(len(yv))
                                  if a[k] != 0.0}, float(b))
                                for a, b in desc.rows]
            pos = self.follower_pos[(desc.agent, atom.index)]
            ok = all(float(np.dot(a, pos)) <= b + self.membership_tol
                     for a, b in desc.rows)
            return "const", ok
        if isinstance(desc, Proximity):
            yv = self._leader_y(atom.index)
            target = self.follower_pos[(desc.follower, atom.index)]
            w = desc.half_width
            rows = []
            for c in desc.coords:
                rows.append(({yv[c]: 1.0}, float(target[c]) + w))
                rows.append(({yv[c]: -1.0}, -float(target[c]) + w))
            return "rows", rows
        raise MilpError(f"no MILP binding for descriptor {desc!r}")


def _halfspace_bound(model: MilpModel, coefs: dict):
    lo = hi = 0.0
    for vid, a in coefs.items():
        v = model.vars[vid]
        p = (a * v.ub, a * v.lb)
        hi += max(p)
        lo += min(p)
        if not math.isfinite(hi) or not math.isfinite(lo):
            raise MilpError(
                f"cannot size big-M: variable {v.name} is unbounded")
    return lo, hi


def _to_nnf(node, negate: bool = False):
    """Push negations down to the atoms."""
    if isinstance(node, BTrue):
        return BFalse() if negate else node
    if isinstance(node, BFalse):
        return BTrue() if negate else node
    if isinstance(node, BAtom):
        return BNot(node) if negate else node
    if isinstance(node, BNot):
        return _to_nnf(node.child, not negate)
    if isinstance(node, BAnd):
        children = tuple(_to_nnf(c, negate) for c in node.children)
        return BOr(children) if negate else BAnd(children)
    if isinstance(node, BOr):
        children = tuple(_to_nnf(c, negate) for c in node.children)
        return BAnd(children) if negate else BOr(children)
    raise MilpError(f"cannot encode node {node!r}")


def encode_formula(model: MilpModel, bf, binder: AtomBinder,
                   big_m: float | None = None, literal_map: dict | None = None,
                   commit_margin: float = 0.0) -> int:
    """Encode satisfaction of a time-stamped Boolean formula.

    Returns the id of a binary fixed to 1 (satisfaction is asserted through
    the added rows; the constant marks the assertion point).  big_m, when
    given, is validated against the variable bounds of every predicate (too
    small is rejected at build time); by default each predicate row gets its
    own value derived from the bounds plus 10% margin.

    literal_map, when supplied, is filled with (positive, atom) -> variable
    id for every literal that received an indicator binary, so callers can
    attach strengthening rows to them.

    commit_margin tightens every literal by its polarity: positive literals
    must penetrate their half-spaces by the margin and negative literals
    must clear them by it.  Solver tolerances compound through the dynamics
    when a plan is replayed, so a synthesis loop that classifies executed
    samples against the same predicates needs planned hits and misses to
    stay this far from the boundaries.  Zero keeps the encoding exact.
    """
    enc = _FormulaEncoder(model, binder, big_m, commit_margin)
    enc.assert_node(_to_nnf(bf))
    top = model.add_binary("phi_top")
    model.fix_var(top, 1.0)
    if literal_map is not None:
        for key, val in enc.lit_memo.items():
            if len(key) == 2 and isinstance(val, tuple) and val[0] == "var":
                literal_map[key] = val[1]
    return top


class _FormulaEncoder:
    def __init__(self, model: MilpModel, binder: AtomBinder, big_m,
                 commit_margin: float = 0.0):
        self.model = model
        self.binder = binder
        self.big_m = big_m
        self.margin = commit_margin
        self.lit_memo: dict = {}
        self.node_memo: dict = {}
        self.bind_memo: dict = {}

    # -- literals ---------------------------------------------------------

    def _bind(self, atom: BAtom):
        out = self.bind_memo.get(atom)
        if out is None:
            out = self.binder.bind(atom)
            self.bind_memo[atom] = out
        return out

    def _m_for(self, coefs: dict, rhs: float, violation: bool) -> float:
        lo, hi = _halfspace_bound(self.model, coefs)
        need = ((rhs + self.margin + EPS_STRICT - lo) if violation
                else (hi - (rhs - self.margin)))
        need = max(need, EPS_STRICT)
        if self.big_m is not None:
            if self.big_m < need:
                raise MilpError(
                    f"big-M {self.big_m} too small: predicate needs {need}")
            return self.big_m
        return need * BIG_M_MARGIN

    def assert_literal(self, positive: bool, atom: BAtom) -> None:
        kind, payload = self._bind(atom)
        if kind == "const":
            if payload != positive:
                self.assert_false()
            return
        if self.big_m is not None:
            # a user-supplied big-M is validated against every predicate,
            # asserted or not, so an undersized value fails at build time
            for coefs, rhs in payload:
                self._m_for(coefs, rhs, violation=not positive)
        if positive:
            for coefs, rhs in payload:
                self.model.add_row(dict(coefs), LE, rhs - self.margin,
                                   f"lit{atom.name}@{atom.index}")
        elif len(payload) == 1:
            coefs, rhs = payload[0]
            self.model.add_row(dict(coefs), GE, rhs + self.margin + EPS_STRICT,
                               f"nlit{atom.name}@{atom.index}")
        else:
            ws = [self.violation_var(atom, k) for k in range(len(payload))]
            self.model.add_row({w: 1.0 for w in ws}, GE, 1.0,
                               f"nlit{atom.name}@{atom.index}")

    def violation_var(self, atom: BAtom, k: int) -> int:
        """Binary implying half-space k of the atom is strictly violated."""
        key = ("viol", atom, k)
        w = self.lit_memo.get(key)
        if w is not None:
            return w
        _, payload = self._bind(atom)
        coefs, rhs = payload[k]
        m_val = self._m_for(coefs, rhs, violation=True)
        w = self.model.add_binary(f"w_{atom.name}@{atom.index}_{k}")
        row = dict(coefs)
        row[w] = -m_val
        self.model.add_row(row, GE, rhs + self.margin + EPS_STRICT - m_val,
                           f"viol{atom.name}@{atom.index}_{k}")
        self.lit_memo[key] = w
        return w

    def literal_var(self, positive: bool, atom: BAtom):
        """('const', bool) or ('var', vid): vid = 1 implies the literal."""
        key = (positive, atom)
        out = self.lit_memo.get(key)
        if out is not None:
            return out
        kind, payload = self._bind(atom)
        if kind == "const":
            out = ("const", payload == positive)
        elif positive:
            z = self.model.add_binary(f"z_{atom.name}@{atom.index}")
            for coefs, rhs in payload:
                m_val = self._m_for(coefs, rhs, violation=False)
                row = dict(coefs)
                row[z] = m_val
                self.model.add_row(row, LE, rhs - self.margin + m_val,
                                   f"on{atom.name}@{atom.index}")
            out = ("var", z)
        elif len(payload) == 1:
            coefs, rhs = payload[0]
            m_val = self._m_for(coefs, rhs, violation=True)
            z = self.model.add_binary(f"nz_{atom.name}@{atom.index}")
            row = dict(coefs)
            row[z] = -m_val
            self.model.add_row(row, GE, rhs + self.margin + EPS_STRICT - m_val,
                               f"noff{atom.name}@{atom.index}")
            out = ("var", z)
        else:
            ws = [self.violation_var(atom, k) for k in range(len(payload))]
            z = self.model.add_var(f"nz_{atom.name}@{atom.index}", 0.0, 1.0)
            coefs = {w: -1.0 for w in ws}
            coefs[z] = 1.0
            self.model.add_row(coefs, LE, 0.0,
                               f"ncover{atom.name}@{atom.index}")
            out = ("var", z)
        self.lit_memo[key] = out
        return out

    # -- structure ---------------------------------------------------------

    def assert_false(self) -> None:
        self.model.add_row({}, GE, 1.0, "phi_unsat")

    def assert_node(self, node) -> None:
        if isinstance(node, BTrue):
            return
        if isinstance(node, BFalse):
            self.assert_false()
            return
        if isinstance(node, BAtom):
            self.assert_literal(True, node)
            return
        if isinstance(node, BNot):
            self.assert_literal(False, node.child)
            return
        if isinstance(node, BAnd):
            for c in node.children:
                self.assert_node(c)
            return
        if isinstance(node, BOr):
            terms = []
            for c in _flatten_or(node):
                kind, payload = self.node_var(c)
                if kind == "const":
                    if payload:
                        return
                    continue
                terms.append(payload)
            if not terms:
                self.assert_false()
            else:
                self.model.add_row({t: 1.0 for t in terms}, GE, 1.0, "cover")
            return
        raise MilpError(f"cannot encode node {node!r}")

    def node_var(self, node):
        """('const', bool) or ('var', vid): vid = 1 implies the subformula."""
        if isinstance(node, BTrue):
            return "const", True
        if isinstance(node, BFalse):
            return "const", False
        if isinstance(node, BAtom):
            return self.literal_var(True, node)
        if isinstance(node, BNot):
            return self.literal_var(False, node.child)
        out = self.node_memo.get(node)
        if out is not None:
            return out
        if isinstance(node, BAnd):
            child_vars = []
            dead = False
            for c in node.children:
                kind, payload = self.node_var(c)
                if kind == "const":
                    if not payload:
                        dead = True
                        break
                else:
                    child_vars.append(payload)
            if dead:
                out = ("const", False)
            elif not child_vars:
                out = ("const", True)
            elif len(child_vars) == 1:
                out = ("var", child_vars[0])
            else:
                w = self.model.add_var(f"and{self.model.n_vars}", 0.0, 1.0)
                for c in child_vars:
                    self.model.add_row({w: 1.0, c: -1.0}, LE, 0.0,
                                       f"and{w}_{c}")
                out = ("var", w)
        elif isinstance(node, BOr):
            child_vars = []
            for c in _flatten_or(node):
                kind, payload = self.node_var(c)
                if kind == "const":
                    if payload:
                        out = ("const", True)
                        self.node_memo[node] = out
                        return out
                else:
                    child_vars.append(payload)
            if not child_vars:
                out = ("const", False)
            elif len(child_vars) == 1:
                out = ("var", child_vars[0])
            else:
                w = self.model.add_var(f"or{self.model.n_vars}", 0.0, 1.0)
                coefs = {c: -1.0 for c in child_vars}
                coefs[w] = 1.0
                self.model.add_row(coefs, LE, 0.0, f"or{w}")
                out = ("var", w)
        else:
            raise MilpError(f"cannot encode node {node!r}")
        self.node_memo[node] = out
        return out


def _flatten_or(node):
    for c in node.children:
        if isinstance(c, BOr):
            yield from _flatten_or(c)
        else:
            yield c


def add_l1_objective(model: MilpModel, u_vars, weights=None) -> list:
    """Add sum_k w_k |u_k| via auxiliary bounding variables; returns their ids."""
    u_vars = list(u_vars)
    if weights is None:
        weights = [1.0] * len(u_vars)
    t_vars = []
    for u, w in zip(u_vars, weights):
        t = model.add_var(f"abs{u}", 0.0, math.inf)
        model.add_row({u: 1.0, t: -1.0}, LE, 0.0, f"abs_p{u}")
        model.add_row({u: -1.0, t: -1.0}, LE, 0.0, f"abs_n{u}")
        model.add_objective_term(t, float(w))
        t_vars.append(t)
    return t_vars
