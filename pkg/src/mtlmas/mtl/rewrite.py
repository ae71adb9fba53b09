"""Receding-horizon formula rewriting.

``rewrite_at(f, j, ell, trace, atoms)`` produces the time-stamped Boolean
formula [f]^ell_j: atoms at indices <= ell are replaced by constants using
the observed samples, atoms at later indices stay symbolic as (name, index)
pairs, and temporal operators expand into finite and/or structure.

When a ``horizon`` is given, indices beyond it are truncated under weak
semantics.  Weak truncation is polarity-aware: a symbolic atom past the
horizon becomes True under an even number of negations and False under an
odd number, so that the enclosing negations evaluate it weakly-true.
Unbounded intervals require a horizon.
"""
from __future__ import annotations

from dataclasses import dataclass

from .formula import (Always, Atom, AtomTable, Eventually, Formula, MtlError,
                      Not, And, Or, Trace, TrueF, Until)


class BFormula:
    """Base class of time-stamped Boolean formula nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class BTrue(BFormula):
    pass


@dataclass(frozen=True)
class BFalse(BFormula):
    pass


@dataclass(frozen=True)
class BAtom(BFormula):
    name: str
    index: int


@dataclass(frozen=True)
class BNot(BFormula):
    child: BFormula


@dataclass(frozen=True)
class BAnd(BFormula):
    children: tuple


@dataclass(frozen=True)
class BOr(BFormula):
    children: tuple


TRUE = BTrue()
FALSE = BFalse()


def bnot(x: BFormula) -> BFormula:
    if isinstance(x, BTrue):
        return FALSE
    if isinstance(x, BFalse):
        return TRUE
    if isinstance(x, BNot):
        return x.child
    return BNot(x)


def band(parts) -> BFormula:
    out = []
    seen = set()
    for p in parts:
        if isinstance(p, BFalse):
            return FALSE
        if isinstance(p, BTrue) or p in seen:
            continue
        seen.add(p)
        out.append(p)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return BAnd(tuple(out))


def bor(parts) -> BFormula:
    out = []
    seen = set()
    for p in parts:
        if isinstance(p, BTrue):
            return TRUE
        if isinstance(p, BFalse) or p in seen:
            continue
        seen.add(p)
        out.append(p)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return BOr(tuple(out))


def _expand_window(j: int, interval, horizon):
    """Window indices for expansion, plus one out-of-horizon representative.

    Past the horizon every index yields the identical constant-folded
    rewrite, and in a disjunction the nearest one dominates (it carries the
    fewest conjuncts), so a single representative at horizon + 1 is exact.
    """
    lo = j + interval.lo
    if interval.unbounded:
        if horizon is None:
            raise MtlError("unbounded interval requires a truncation horizon")
        return range(lo, max(lo, horizon + 1) + 1)
    hi = j + int(interval.hi)
    if horizon is not None:
        hi = min(hi, max(lo, horizon + 1))
    return range(lo, hi + 1)


def rewrite_at(f: Formula, j: int, ell: int, trace: Trace, atoms: AtomTable,
               horizon=None, positive: bool = True) -> BFormula:
    """Compute [f]^ell_j against the observed prefix ``trace``.

    trace must contain samples 0..ell (at least).  ``horizon``, when given,
    truncates under weak semantics; the output then contains symbolic atoms
    only at indices in (ell, horizon].
    """
    if trace.horizon < ell:
        raise MtlError(f"trace has {trace.horizon + 1} samples, need >= {ell + 1}")

    if isinstance(f, TrueF):
        return TRUE
    if isinstance(f, Atom):
        if j <= ell:
            return TRUE if atoms.holds(f.name, trace, j) else FALSE
        if horizon is not None and j > horizon:
            return TRUE if positive else FALSE
        return BAtom(f.name, j)
    if isinstance(f, Not):
        return bnot(rewrite_at(f.child, j, ell, trace, atoms, horizon, not positive))
    if isinstance(f, And):
        return band([rewrite_at(f.left, j, ell, trace, atoms, horizon, positive),
                     rewrite_at(f.right, j, ell, trace, atoms, horizon, positive)])
    if isinstance(f, Or):
        return bor([rewrite_at(f.left, j, ell, trace, atoms, horizon, positive),
                    rewrite_at(f.right, j, ell, trace, atoms, horizon, positive)])
    if isinstance(f, Until):
        disjuncts = []
        for jp in _expand_window(j, f.interval, horizon):
            parts = [rewrite_at(f.right, jp, ell, trace, atoms, horizon, positive)]
            parts.extend(rewrite_at(f.left, jpp, ell, trace, atoms, horizon, positive)
                         for jpp in range(j, jp))
            disjuncts.append(band(parts))
        return bor(disjuncts)
    if isinstance(f, Eventually):
        return bor(rewrite_at(f.child, jp, ell, trace, atoms, horizon, positive)
                   for jp in _expand_window(j, f.interval, horizon))
    if isinstance(f, Always):
        return band(rewrite_at(f.child, jp, ell, trace, atoms, horizon, positive)
                    for jp in _expand_window(j, f.interval, horizon))
    raise MtlError(f"unknown formula node {f!r}")


def symbolic_atoms(bf: BFormula) -> set:
    """All (name, index) pairs appearing in a time-stamped formula."""
    if isinstance(bf, (BTrue, BFalse)):
        return set()
    if isinstance(bf, BAtom):
        return {(bf.name, bf.index)}
    if isinstance(bf, BNot):
        return symbolic_atoms(bf.child)
    if isinstance(bf, (BAnd, BOr)):
        out = set()
        for c in bf.children:
            out |= symbolic_atoms(c)
        return out
    raise MtlError(f"unknown node {bf!r}")


def eval_bformula(bf: BFormula, assign) -> bool:
    """Evaluate under ``assign((name, index)) -> bool`` for symbolic atoms."""
    if isinstance(bf, BTrue):
        return True
    if isinstance(bf, BFalse):
        return False
    if isinstance(bf, BAtom):
        return bool(assign((bf.name, bf.index)))
    if isinstance(bf, BNot):
        return not eval_bformula(bf.child, assign)
    if isinstance(bf, BAnd):
        return all(eval_bformula(c, assign) for c in bf.children)
    if isinstance(bf, BOr):
        return any(eval_bformula(c, assign) for c in bf.children)
    raise MtlError(f"unknown node {bf!r}")
