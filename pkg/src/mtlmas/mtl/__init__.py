from .formula import (FULL, MEMBERSHIP_TOL, UNBOUNDED, Always, And, Atom,
                      AtomTable, Eventually, FALSE, Formula, HalfSpaceConj,
                      Interval, MtlError, Not, Or, Proximity, Trace, TrueF,
                      Until, atom_names, conj, to_text)
from .parser import ParseError, parse
from .semantics import eval_strong, eval_weak, necessary_length
from .rewrite import (BAnd, BAtom, BFalse, BFormula, BNot, BOr, BTrue,
                      band, bnot, bor, eval_bformula, rewrite_at,
                      symbolic_atoms)

__all__ = [
    "FULL", "MEMBERSHIP_TOL", "UNBOUNDED", "Always", "And", "Atom",
    "AtomTable", "Eventually", "FALSE", "Formula", "HalfSpaceConj",
    "Interval", "MtlError", "Not", "Or", "Proximity", "Trace", "TrueF",
    "Until", "atom_names", "conj", "to_text", "ParseError", "parse",
    "eval_strong", "eval_weak", "necessary_length", "BAnd", "BAtom",
    "BFalse", "BFormula", "BNot", "BOr", "BTrue", "band", "bnot", "bor",
    "eval_bformula", "rewrite_at", "symbolic_atoms",
]
