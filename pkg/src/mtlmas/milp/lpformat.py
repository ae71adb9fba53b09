"""CPLEX LP-format text export, for cross-checking against external solvers.

Layout: an objective section (``Minimize``), one named row per constraint
(``Subject To``), explicit ``Bounds`` for every variable whose bounds differ
from the LP-format default of [0, +inf), and a ``Binaries`` section.  Names
are the model's variable and row names, which are generated LP-safe.
"""
from __future__ import annotations

import math

from .model import EQ, GE, LE, MilpModel

_SENSE = {LE: "<=", GE: ">=", EQ: "="}


def _term(coef: float, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    return f"{sign} {mag:.17g} {name} "


def _expr(coefs: dict, model: MilpModel) -> str:
    parts = []
    for vid in sorted(coefs):
        if coefs[vid] == 0.0:
            continue
        parts.append(_term(coefs[vid], model.vars[vid].name, not parts))
    return "".join(parts).strip() or "0 " + model.vars[0].name


def export_lp(model: MilpModel) -> str:
    lines = ["\\ mtlmas MILP export", "Minimize"]
    lines.append(" obj: " + (_expr(model.objective, model) if model.objective
                             else "0 " + model.vars[0].name))
    lines.append("Subject To")
    for i, r in enumerate(model.rows):
        name = r.name or f"c{i}"
        lines.append(f" {name}: {_expr(r.coefs, model)} {_SENSE[r.sense]} {r.rhs:.17g}")
    lines.append("Bounds")
    for v in model.vars:
        if v.lb == 0.0 and v.ub == math.inf:
            continue
        if v.lb == -math.inf and v.ub == math.inf:
            lines.append(f" {v.name} free")
        else:
            lo = "-inf" if v.lb == -math.inf else f"{v.lb:.17g}"
            hi = "+inf" if v.ub == math.inf else f"{v.ub:.17g}"
            lines.append(f" {lo} <= {v.name} <= {hi}")
    binaries = [model.vars[vid].name for vid in model.binary_ids()]
    if binaries:
        lines.append("Binaries")
        for i in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[i:i + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(model: MilpModel, path) -> None:
    with open(path, "w") as fh:
        fh.write(export_lp(model))
