import numpy as np
import pytest

from mtlmas.mtl import (Always, And, Atom, AtomTable, Eventually,
                        HalfSpaceConj, Interval, MtlError, Not, Or,
                        Proximity, Trace, TrueF, Until, UNBOUNDED,
                        atom_names, to_text)


def test_interval_validation():
    Interval(0, 5)
    Interval(2, UNBOUNDED)
    with pytest.raises(MtlError):
        Interval(-1, 3)
    with pytest.raises(MtlError):
        Interval(4, 2)


def test_interval_str():
    assert str(Interval(0, UNBOUNDED)) == ""
    assert str(Interval(1, 3)) == "[1,3]"


def test_formula_operators_build_nodes():
    p, q = Atom("p"), Atom("q")
    assert p & q == And(p, q)
    assert p | q == Or(p, q)
    assert ~p == Not(p)


def test_atom_names():
    f = And(Always(Atom("a"), Interval(0, 2)), Not(Or(Atom("b"), TrueF())))
    assert atom_names(f) == {"a", "b"}


def test_to_text_examples():
    f = Always(Eventually(Or(Atom("inG1"), Atom("inG2")), Interval(0, 6)))
    assert to_text(f) == "G F[0,6] (inG1 | inG2)"
    assert to_text(Not(TrueF())) == "F0"
    assert to_text(Until(Atom("a"), Atom("b"), Interval(1, 2))) == "a U[1,2] b"


def test_trace_shape_checks():
    with pytest.raises(MtlError):
        Trace(np.zeros((3, 2)), 0.5, dim=3, n_followers=0)
    with pytest.raises(MtlError):
        Trace(np.zeros((0, 3)), 0.5, dim=3, n_followers=0)
    tr = Trace(np.arange(12.0).reshape(2, 6), 0.5, dim=3, n_followers=1)
    assert tr.horizon == 1
    assert tr.agent_pos(1, 1).tolist() == [9.0, 10.0, 11.0]


def test_halfspace_membership_tolerance():
    pred = HalfSpaceConj(agent=0, rows=(((1.0,), 2.0),))
    tr = Trace(np.array([[2.0], [2.0 + 1e-9], [2.1]]), 0.5, dim=1)
    assert pred.holds(tr, 0)
    assert pred.holds(tr, 1)  # within the membership slack
    assert not pred.holds(tr, 2)


def test_proximity_box_is_inscribed_in_ball():
    pred = Proximity(follower=1, eta=4.0, coords=(0, 1))
    assert pred.half_width == pytest.approx(4.0 / np.sqrt(2))
    # corner of the box is exactly on the 2-norm ball
    row = np.array([[0.0, 0.0, 5.0, pred.half_width, pred.half_width, 0.0]])
    tr = Trace(row, 0.5, dim=3, n_followers=1)
    assert pred.holds(tr, 0)
    assert np.hypot(pred.half_width, pred.half_width) <= 4.0 + 1e-12


def test_atom_table_resolution():
    table = AtomTable()
    table.add("p", HalfSpaceConj(agent=0, rows=(((1.0,), 0.0),)))
    table.check_resolves(Atom("p"))
    with pytest.raises(MtlError):
        table.check_resolves(And(Atom("p"), Atom("q")))
