import numpy as np
import pytest

from mtlmas.mtl import (Always, And, Atom, AtomTable, BAnd, BAtom, BFalse,
                        BNot, BOr, BTrue, Eventually, HalfSpaceConj,
                        Interval, MtlError, Not, Trace, Until,
                        UNBOUNDED, band, bor, bnot, eval_bformula, eval_weak,
                        rewrite_at, symbolic_atoms)

from helpers import (assign_from_trace, grid_atom_table, random_formula,
                     random_trace)


@pytest.fixture
def pi_table():
    table = AtomTable()
    table.add("pi", HalfSpaceConj(agent=0, rows=(((1.0,), 0.0),)))
    table.add("p1", HalfSpaceConj(agent=0, rows=(((1.0,), 1.0),)))
    table.add("p2", HalfSpaceConj(agent=0, rows=(((-1.0,), 1.0),)))
    return table


def trace_of(values) -> Trace:
    return Trace(np.asarray(values, dtype=float).reshape(-1, 1), 0.5, dim=1)


def test_constructors_fold_constants():
    a = BAtom("p", 3)
    assert band([BTrue(), a]) == a
    assert band([BFalse(), a]) == BFalse()
    assert bor([BTrue(), a]) == BTrue()
    assert bor([BFalse(), a]) == a
    assert bnot(BTrue()) == BFalse()
    assert bnot(bnot(a)) == a
    assert band([a, a]) == a


def test_atom_resolved_from_sample(pi_table):
    # pi holds at sample 2 (value <= 0)
    tr = trace_of([1, 1, -1, 1, 1, 1])
    assert rewrite_at(Atom("pi"), 2, 5, tr, pi_table) == BTrue()
    assert rewrite_at(Atom("pi"), 3, 5, tr, pi_table) == BFalse()


def test_atom_beyond_ell_stays_symbolic(pi_table):
    tr = trace_of([1] * 6)
    assert rewrite_at(Atom("pi"), 9, 5, tr, pi_table) == BAtom("pi", 9)


def test_until_expansion_matches_recursion(pi_table):
    # [p1 U[1,2] p2]^0_0 = (p2_1 & p1_0) | (p2_2 & p1_0 & p1_1) with p1_0
    # resolved from the sample; here p1 holds at 0 so it folds away.
    tr = trace_of([0.5])
    f = Until(Atom("p1"), Atom("p2"), Interval(1, 2))
    out = rewrite_at(f, 0, 0, tr, pi_table)
    assert out == BOr((BAtom("p2", 1), BAnd((BAtom("p2", 2), BAtom("p1", 1)))))
    # and with p1 failing at 0, the whole disjunction collapses
    tr2 = trace_of([1.5])
    assert rewrite_at(f, 0, 0, tr2, pi_table) == BFalse()


def test_unbounded_interval_requires_horizon(pi_table):
    tr = trace_of([1])
    f = Always(Atom("pi"), Interval(0, UNBOUNDED))
    with pytest.raises(MtlError, match="horizon"):
        rewrite_at(f, 0, 0, tr, pi_table)
    out = rewrite_at(f, 0, 0, tr, pi_table, horizon=3)
    # index 0 resolved false -> whole box false
    assert out == BFalse()


def test_output_is_temporal_operator_free(pi_table):
    tr = trace_of([1, -1])
    f = And(Always(Atom("pi"), Interval(0, 3)),
            Until(Atom("p1"), Eventually(Atom("p2"), Interval(0, 2)),
                  Interval(0, 2)))
    out = rewrite_at(f, 0, 1, tr, pi_table, horizon=6)
    stack = [out]
    while stack:
        node = stack.pop()
        assert isinstance(node, (BTrue, BFalse, BAtom, BNot, BAnd, BOr))
        if isinstance(node, BNot):
            stack.append(node.child)
        elif isinstance(node, (BAnd, BOr)):
            stack.extend(node.children)


def test_weak_truncation_is_polarity_aware(pi_table):
    # ◇[0,9] !pi on a 2-sample prefix: indices beyond the horizon satisfy
    # anything weakly, so the disjunction is true even though substituting
    # "true" for the атом under the negation would say otherwise.
    tr = trace_of([-1, -1])
    f = Eventually(Not(Atom("pi")), Interval(0, 9))
    out = rewrite_at(f, 0, 1, tr, pi_table, horizon=1)
    assert out == BTrue()
    assert eval_weak(tr, 0, f, pi_table)


def test_trace_too_short_rejected(pi_table):
    tr = trace_of([1, 1])
    with pytest.raises(MtlError, match="samples"):
        rewrite_at(Atom("pi"), 0, 5, tr, pi_table)


def test_rewrite_soundness_500_random_pairs():
    """Assigning the symbolic atoms from the full trace reproduces eval_weak."""
    table = grid_atom_table()
    names = sorted(table.atoms)
    rng = np.random.default_rng(11)
    for _ in range(500):
        h = int(rng.integers(0, 11))
        tr = random_trace(rng, h)
        f = random_formula(rng, names, depth=3)
        ell = int(rng.integers(0, h + 1))
        bf = rewrite_at(f, 0, ell, tr, table, horizon=tr.horizon)
        got = eval_bformula(bf, assign_from_trace(tr, table))
        assert got == eval_weak(tr, 0, f, table)


def test_rewrite_soundness_with_unbounded_operators():
    table = grid_atom_table()
    names = sorted(table.atoms)
    rng = np.random.default_rng(12)
    for _ in range(300):
        h = int(rng.integers(0, 11))
        tr = random_trace(rng, h)
        f = random_formula(rng, names, depth=3, allow_unbounded=True)
        ell = int(rng.integers(0, h + 1))
        bf = rewrite_at(f, 0, ell, tr, table, horizon=tr.horizon)
        got = eval_bformula(bf, assign_from_trace(tr, table))
        assert got == eval_weak(tr, 0, f, table)


def test_symbolic_atoms_listing(pi_table):
    tr = trace_of([1])
    f = Until(Atom("p1"), Atom("p2"), Interval(1, 3))
    bf = rewrite_at(f, 0, 0, tr, pi_table)
    names = {a for a, _ in symbolic_atoms(bf)}
    indices = {i for _, i in symbolic_atoms(bf)}
    assert names <= {"p1", "p2"}
    assert indices <= {1, 2, 3}
