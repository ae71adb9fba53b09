import math

import numpy as np
import pytest

from mtlmas.milp import (AtomBinder, BranchAndBoundSolver, MilpError,
                         MilpModel, Status, add_l1_objective, encode_dynamics,
                         encode_formula, solve)
from mtlmas.mtl import (Atom, AtomTable, BTrue, HalfSpaceConj, Proximity,
                        Trace, eval_weak, rewrite_at)

from helpers import (clamped_feasibility, grid_atom_table, random_formula,
                     random_trace)


class TestEncodeDynamics:
    def test_identity_zero_input_fixed_point(self):
        m = MilpModel()
        h = encode_dynamics(m, np.eye(2), np.eye(2), np.eye(2),
                            np.zeros(2), 3, (np.zeros(2), np.zeros(2)))
        res = solve(m)
        assert res.status is Status.OPTIMAL
        for j in range(4):
            assert res.values(h.x_vars[j]) == pytest.approx([0.0, 0.0])

    def test_scalar_doubling_chain(self):
        # x+ = 2x + u, x0 = 1, u == 0, N = 3 -> x3 = 8
        m = MilpModel()
        h = encode_dynamics(m, [[2.0]], [[1.0]], [[1.0]],
                            [1.0], 3, ([0.0], [0.0]))
        res = solve(m)
        assert res.values(h.x_vars[3])[0] == pytest.approx(8.0)

    def test_dimension_mismatch_rejected(self):
        m = MilpModel()
        with pytest.raises(MilpError):
            encode_dynamics(m, np.eye(2), np.eye(3), np.eye(2),
                            np.zeros(2), 2, (np.zeros(2), np.zeros(2)))

    def test_input_bounds_enforced(self):
        m = MilpModel()
        h = encode_dynamics(m, [[1.0]], [[1.0]], [[1.0]],
                            [0.0], 1, ([-2.0], [2.0]))
        m.add_objective_term(h.x_vars[1][0], -1.0)  # maximize x1
        res = solve(m)
        assert res.values(h.x_vars[1])[0] == pytest.approx(2.0)

    def test_case_study_leader_hover_holds_position(self):
        # the encoded chain must match the plant module's discrete map:
        # hovering (zero input from rest) keeps the output constant
        from mtlmas.plant import discretize_zoh, leader_model
        leader = leader_model()
        a_d, b_d = discretize_zoh(leader.a, leader.b, 0.5)
        x0 = np.zeros(8)
        x0[:3] = [-5.0, -30.0, 5.0]
        m = MilpModel()
        h = encode_dynamics(m, a_d, b_d, leader.c, x0, 4,
                            (np.zeros(4), np.zeros(4)))
        res = solve(m)
        assert res.status is Status.OPTIMAL
        # oracle: iterate the plant-side map directly
        x = x0.copy()
        for j in range(4):
            assert res.values(h.y_vars[j]) == pytest.approx(
                (leader.c @ x).tolist(), abs=1e-9)
            assert res.values(h.y_vars[j]) == pytest.approx(
                [-5.0, -30.0, 5.0], abs=1e-9)
            x = a_d @ x + b_d @ np.zeros(4)


def single_atom_table():
    table = AtomTable()
    table.add("pi", HalfSpaceConj(agent=0, rows=(((1.0,), 3.0),)))
    return table


class TestEncodeFormula:
    def test_true_returns_constant_binary_without_rows(self):
        m = MilpModel()
        before = len(m.rows)
        top = encode_formula(m, BTrue(), AtomBinder(single_atom_table(), {}, {}))
        assert len(m.rows) == before
        assert m.vars[top].lb == m.vars[top].ub == 1.0

    def test_atom_constrains_optimum(self):
        # pi_0: y <= 3 with y in [0, 10]; maximizing y subject to the
        # formula must stop at 3.
        table = single_atom_table()
        m = MilpModel()
        y = m.add_var("y0", 0.0, 10.0)
        binder = AtomBinder(table, {0: [y]}, {})
        tr = Trace(np.zeros((1, 1)), 0.5, dim=1)
        bf = rewrite_at(Atom("pi"), 0, -1, tr, table, horizon=0)
        encode_formula(m, bf, binder)
        m.add_objective_term(y, -1.0)
        res = solve(m)
        assert res.status is Status.OPTIMAL
        assert res.value(y) == pytest.approx(3.0)

    def test_negated_atom_forces_strict_violation(self):
        from mtlmas.mtl import Not
        table = single_atom_table()
        m = MilpModel()
        y = m.add_var("y0", 0.0, 10.0)
        binder = AtomBinder(table, {0: [y]}, {})
        tr = Trace(np.zeros((1, 1)), 0.5, dim=1)
        bf = rewrite_at(Not(Atom("pi")), 0, -1, tr, table, horizon=0)
        encode_formula(m, bf, binder)
        m.add_objective_term(y, 1.0)  # minimize y
        res = solve(m)
        assert res.status is Status.OPTIMAL
        assert res.value(y) >= 3.0 + 1e-6 - 1e-9

    def test_unbounded_variable_rejected_for_big_m(self):
        # an indicator (here: a disjunct) needs a finite big-M, which cannot
        # be derived from an unbounded variable
        from mtlmas.mtl import BAtom, BOr
        table = single_atom_table()
        m = MilpModel()
        y0 = m.add_var("y0")  # unbounded
        y1 = m.add_var("y1")
        binder = AtomBinder(table, {0: [y0], 1: [y1]}, {})
        bf = BOr((BAtom("pi", 0), BAtom("pi", 1)))
        with pytest.raises(MilpError, match="big-M"):
            encode_formula(m, bf, binder)

    def test_user_big_m_validated(self):
        table = single_atom_table()
        m = MilpModel()
        y = m.add_var("y0", 0.0, 1000.0)
        binder = AtomBinder(table, {0: [y]}, {})
        tr = Trace(np.zeros((1, 1)), 0.5, dim=1)
        bf = rewrite_at(Atom("pi"), 0, -1, tr, table, horizon=0)
        with pytest.raises(MilpError, match="too small"):
            encode_formula(m, bf, binder, big_m=10.0)

    def test_proximity_atom_binds_leader_to_follower_constant(self):
        table = AtomTable()
        table.add("near1", Proximity(follower=1, eta=4.0, coords=(0, 1)))
        m = MilpModel()
        y = [m.add_var(f"y0_{k}", -50.0, 50.0) for k in range(3)]
        target = np.array([10.0, -5.0, 0.0])
        binder = AtomBinder(table, {0: y}, {(1, 0): target})
        tr = Trace(np.zeros((1, 6)), 0.5, dim=3, n_followers=1)
        bf = rewrite_at(Atom("near1"), 0, -1, tr, table, horizon=0)
        encode_formula(m, bf, binder)
        m.add_objective_term(y[0], 1.0)  # push y0_x as low as possible
        res = solve(m)
        w = 4.0 / math.sqrt(2)
        assert res.value(y[0]) == pytest.approx(10.0 - w)

    def test_follower_region_atom_folds_to_constant(self):
        table = AtomTable()
        table.add("f1_low", HalfSpaceConj(agent=1, rows=(((1.0, 0.0, 0.0), 0.0),)))
        m = MilpModel()
        binder = AtomBinder(table, {}, {(1, 2): np.array([-1.0, 0.0, 0.0])})
        bf = rewrite_at(Atom("f1_low"), 2, -1,
                        Trace(np.zeros((1, 6)), 0.5, dim=3, n_followers=1),
                        table, horizon=5)
        top = encode_formula(m, bf, binder)
        assert m.vars[top].lb == 1.0


class TestL1Objective:
    def test_lower_bounded_single_var(self):
        from mtlmas.milp import GE
        m = MilpModel()
        u = m.add_var("u", -5.0, 5.0)
        m.add_row({u: 1.0}, GE, 2.0)
        add_l1_objective(m, [u])
        res = solve(m)
        assert res.objective == pytest.approx(2.0)
        assert res.value(u) == pytest.approx(2.0)

    def test_unconstrained_is_zero(self):
        m = MilpModel()
        u = m.add_var("u", -5.0, 5.0)
        add_l1_objective(m, [u])
        res = solve(m)
        assert res.objective == pytest.approx(0.0)

    def test_two_vars_sum(self):
        from mtlmas.milp import GE
        m = MilpModel()
        u1 = m.add_var("u1", -9.0, 9.0)
        u2 = m.add_var("u2", -9.0, 9.0)
        m.add_row({u1: 1.0}, GE, 1.0)
        m.add_row({u2: 1.0}, GE, 3.0)
        add_l1_objective(m, [u1, u2])
        res = solve(m)
        assert res.objective == pytest.approx(4.0)


class TestOracleEquivalenceSmoke:
    """MILP feasibility with clamped trajectory == eval_weak (30 cases)."""

    def test_clamped_random_formulas(self):
        table = grid_atom_table()
        names = sorted(table.atoms)
        rng = np.random.default_rng(5)
        solver = BranchAndBoundSolver()
        for _ in range(30):
            tr = random_trace(rng, int(rng.integers(0, 7)))
            f = random_formula(rng, names, depth=3)
            feasible = clamped_feasibility(f, tr, table, solver)
            assert feasible == eval_weak(tr, 0, f, table)
