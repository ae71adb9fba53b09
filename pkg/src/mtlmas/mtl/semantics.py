"""Strong and weak Boolean semantics of MTL on finite traces.

The two views differ only at out-of-range indices: an atom past the end of
the trace is false in the strong view and true in the weak view, and
negation swaps the views.  Consequently strong satisfaction implies weak
satisfaction, and once ``j + necessary_length(f) <= H`` both views agree.
"""
from __future__ import annotations

from .formula import (Always, Atom, AtomTable, Eventually, Formula,
                      MtlError, Not, And, Or, Trace, TrueF, Until)

STRONG = True
WEAK = False


def _window(j: int, interval, horizon: int):
    """Candidate indices j' in j + interval, capped for finite evaluation.

    All indices past the trace yield index-independent verdicts, so one
    representative at horizon + 1 suffices when the window overshoots.
    """
    lo = j + interval.lo
    hi = lo if interval.unbounded else j + int(interval.hi)
    if interval.unbounded:
        hi = max(lo, horizon + 1)
    else:
        hi = min(hi, max(lo, horizon + 1))
    return range(lo, hi + 1)


def _eval(trace: Trace, j: int, f: Formula, atoms: AtomTable, strong: bool,
          memo: dict) -> bool:
    key = (id(f), j, strong)
    hit = memo.get(key)
    if hit is not None:
        return hit

    if isinstance(f, TrueF):
        out = True
    elif isinstance(f, Atom):
        if j > trace.horizon:
            out = not strong
        else:
            out = atoms.holds(f.name, trace, j)
    elif isinstance(f, Not):
        out = not _eval(trace, j, f.child, atoms, not strong, memo)
    elif isinstance(f, And):
        out = (_eval(trace, j, f.left, atoms, strong, memo)
               and _eval(trace, j, f.right, atoms, strong, memo))
    elif isinstance(f, Or):
        out = (_eval(trace, j, f.left, atoms, strong, memo)
               or _eval(trace, j, f.right, atoms, strong, memo))
    elif isinstance(f, Until):
        out = False
        for jp in _window(j, f.interval, trace.horizon):
            if not _eval(trace, jp, f.right, atoms, strong, memo):
                continue
            if all(_eval(trace, jpp, f.left, atoms, strong, memo)
                   for jpp in range(j, jp)):
                out = True
                break
    elif isinstance(f, Eventually):
        out = any(_eval(trace, jp, f.child, atoms, strong, memo)
                  for jp in _window(j, f.interval, trace.horizon))
    elif isinstance(f, Always):
        # box = not eventually-not; the view flips twice, so the child is
        # evaluated in the same view at every window index.
        out = all(_eval(trace, jp, f.child, atoms, strong, memo)
                  for jp in _window(j, f.interval, trace.horizon))
    else:
        raise MtlError(f"unknown formula node {f!r}")

    memo[key] = out
    return out


def eval_strong(trace: Trace, j: int, f: Formula, atoms: AtomTable) -> bool:
    """(y^{0:H}, j) |=_S f: the prefix already determines satisfaction."""
    if j < 0:
        raise MtlError("time index must be non-negative")
    return _eval(trace, j, f, atoms, STRONG, {})


def eval_weak(trace: Trace, j: int, f: Formula, atoms: AtomTable) -> bool:
    """(y^{0:H}, j) |=_W f: the prefix does not refute the formula."""
    if j < 0:
        raise MtlError("time index must be non-negative")
    return _eval(trace, j, f, atoms, WEAK, {})


def necessary_length(f: Formula):
    """Trace length at which strong and weak verdicts coincide at index 0.

    Returns an int, or UNBOUNDED if the formula contains an unbounded
    temporal operator.
    """
    if isinstance(f, (TrueF, Atom)):
        return 0
    if isinstance(f, Not):
        return necessary_length(f.child)
    if isinstance(f, (And, Or)):
        return max(necessary_length(f.left), necessary_length(f.right))
    if isinstance(f, Until):
        return max(necessary_length(f.left), necessary_length(f.right)) + f.interval.hi
    if isinstance(f, (Eventually, Always)):
        # derived from T U_I phi  /  !(T U_I !phi): same recurrence.
        return necessary_length(f.child) + f.interval.hi
    raise MtlError(f"unknown formula node {f!r}")
