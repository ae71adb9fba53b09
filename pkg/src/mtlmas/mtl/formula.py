"""MTL formula AST over named atomic predicates with integer-index intervals.

Formulas are immutable (frozen dataclasses), hashable and safe to share
between threads.  Intervals are pairs of non-negative sample indices; the
upper endpoint may be ``UNBOUNDED``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Sentinel for an interval with no upper endpoint.  Infinity so that
#: interval arithmetic (max, +) absorbs it naturally.
UNBOUNDED = math.inf

#: Slack used when testing predicate membership on executed samples.  It must
#: sit strictly between the LP feasibility tolerance (planned boundary hits
#: may overshoot by that much) and the encoder's strictness gap EPS_STRICT,
#: so planned hits and planned misses classify unambiguously.
MEMBERSHIP_TOL = 1e-7


class MtlError(Exception):
    """Base class for errors raised by the mtl package."""


@dataclass(frozen=True)
class Interval:
    lo: int
    hi: float  # int, or UNBOUNDED

    def __post_init__(self):
        if self.lo < 0 or int(self.lo) != self.lo:
            raise MtlError(f"interval lower bound must be a non-negative integer, got {self.lo}")
        if self.hi != UNBOUNDED:
            if int(self.hi) != self.hi or self.hi < self.lo:
                raise MtlError(f"bad interval [{self.lo},{self.hi}]")

    @property
    def unbounded(self) -> bool:
        return self.hi == UNBOUNDED

    def __str__(self) -> str:
        if self.lo == 0 and self.unbounded:
            return ""
        hi = "inf" if self.unbounded else str(int(self.hi))
        return f"[{self.lo},{hi}]"


FULL = Interval(0, UNBOUNDED)


class Formula:
    """Base class of all MTL formula nodes."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    interval: Interval = FULL


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula
    interval: Interval = FULL


@dataclass(frozen=True)
class Always(Formula):
    child: Formula
    interval: Interval = FULL


FALSE = Not(TrueF())  # derived constant; the grammar spells it F0


def conj(parts) -> Formula:
    """Right-fold a conjunction; empty -> True."""
    parts = list(parts)
    if not parts:
        return TrueF()
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


# --- printing -------------------------------------------------------------

_PREC_DISJ, _PREC_CONJ, _PREC_UNTIL, _PREC_UNARY = 0, 1, 2, 3


def _print(f: Formula, prec: int) -> str:
    if isinstance(f, TrueF):
        return "T"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        if isinstance(f.child, TrueF):
            return "F0"
        return "!" + _print(f.child, _PREC_UNARY)
    if isinstance(f, And):
        # the parser is left-associative: parenthesize a right-nested chain
        s = f"{_print(f.left, _PREC_CONJ)} & {_print(f.right, _PREC_CONJ + 1)}"
        return f"({s})" if prec > _PREC_CONJ else s
    if isinstance(f, Or):
        s = f"{_print(f.left, _PREC_DISJ)} | {_print(f.right, _PREC_DISJ + 1)}"
        return f"({s})" if prec > _PREC_DISJ else s
    if isinstance(f, Until):
        s = f"{_print(f.left, _PREC_UNARY)} U{f.interval} {_print(f.right, _PREC_UNARY)}"
        return f"({s})" if prec > _PREC_UNTIL else s
    if isinstance(f, Eventually):
        return f"F{f.interval} {_print(f.child, _PREC_UNARY)}"
    if isinstance(f, Always):
        return f"G{f.interval} {_print(f.child, _PREC_UNARY)}"
    raise MtlError(f"unknown formula node {f!r}")


def to_text(f: Formula) -> str:
    """Render a formula in the concrete grammar; parse(to_text(f)) == f."""
    return _print(f, _PREC_DISJ)


def atom_names(f: Formula) -> set:
    if isinstance(f, (TrueF,)):
        return set()
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, Not):
        return atom_names(f.child)
    if isinstance(f, (And, Or, Until)):
        return atom_names(f.left) | atom_names(f.right)
    if isinstance(f, (Eventually, Always)):
        return atom_names(f.child)
    raise MtlError(f"unknown formula node {f!r}")


# --- traces ---------------------------------------------------------------


@dataclass(frozen=True)
class Trace:
    """Finite sequence of stacked position samples, one row per sample index.

    Row layout: ``[y_leader, yhat_1, ..., yhat_Q]`` with ``dim`` coordinates
    per agent.  ``samples[j]`` is the sample at time ``j * ts``.
    """

    samples: np.ndarray
    ts: float
    dim: int
    n_followers: int = 0

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 2:
            raise MtlError("trace samples must be a 2-D array (index, coords)")
        if arr.shape[1] != self.dim * (self.n_followers + 1):
            raise MtlError(
                f"trace rows have {arr.shape[1]} coords, expected "
                f"{self.dim}*({self.n_followers}+1)")
        if arr.shape[0] < 1:
            raise MtlError("trace must contain at least one sample (H >= 0)")
        object.__setattr__(self, "samples", arr)

    @property
    def horizon(self) -> int:
        """H: index of the last sample."""
        return self.samples.shape[0] - 1

    def agent_pos(self, agent: int, j: int) -> np.ndarray:
        """Position of agent (0 = leader, i >= 1 = follower i) at index j."""
        lo = agent * self.dim
        return self.samples[j, lo:lo + self.dim]


# --- atomic predicates ----------------------------------------------------


@dataclass(frozen=True)
class HalfSpaceConj:
    """Conjunction of half-spaces  a_k . y_agent <= b_k  on one agent's position."""

    agent: int
    rows: tuple  # tuple of (tuple-of-coef, rhs)

    def holds(self, trace: Trace, j: int, tol: float = MEMBERSHIP_TOL) -> bool:
        y = trace.agent_pos(self.agent, j)
        return all(float(np.dot(a, y)) <= b + tol for a, b in self.rows)


@dataclass(frozen=True)
class Proximity:
    """Box surrogate for ``|y_leader - yhat_i| <= eta`` over selected coords.

    The 2-norm ball is replaced by its inscribed infinity-norm box of
    half-width ``eta / sqrt(len(coords))``, which is linear and conservative:
    box membership implies ball membership.
    """

    follower: int
    eta: float
    coords: tuple = (0, 1)

    @property
    def half_width(self) -> float:
        return self.eta / math.sqrt(len(self.coords))

    def holds(self, trace: Trace, j: int, tol: float = MEMBERSHIP_TOL) -> bool:
        y0 = trace.agent_pos(0, j)
        yi = trace.agent_pos(self.follower, j)
        w = self.half_width
        return all(abs(float(y0[c] - yi[c])) <= w + tol for c in self.coords)


@dataclass
class AtomTable:
    """Mapping from atom name to its predicate descriptor."""

    atoms: dict = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name in self.atoms

    def __getitem__(self, name: str):
        try:
            return self.atoms[name]
        except KeyError:
            raise MtlError(f"unknown atom {name!r}") from None

    def add(self, name: str, descriptor) -> None:
        self.atoms[name] = descriptor

    def holds(self, name: str, trace: Trace, j: int, tol: float = MEMBERSHIP_TOL) -> bool:
        return self[name].holds(trace, j, tol)

    def check_resolves(self, f: Formula) -> None:
        missing = sorted(n for n in atom_names(f) if n not in self.atoms)
        if missing:
            raise MtlError(f"atoms not in table: {', '.join(missing)}")
