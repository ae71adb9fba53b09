"""Dense simplex pivot kernel, numpy fallback.

The compiled kernel in ``_pivot_cy`` implements the same three operations
with identical arithmetic (elementwise multiply-subtract, no fused
multiply-add, no reductions), so both kernels produce bit-identical
tableaus and the solver is deterministic under either.
"""
from __future__ import annotations

import numpy as np


def pivot(T: np.ndarray, r: int, c: int) -> None:
    """In-place Gauss-Jordan pivot of tableau T on element (r, c)."""
    piv = T[r, c]
    T[r] /= piv
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, c] = 0.0
    T[r, c] = 1.0


def entering_bland(cost: np.ndarray, allowed: np.ndarray, tol: float) -> int:
    """Smallest-index allowed column with reduced cost < -tol, or -1."""
    idx = np.nonzero((cost < -tol) & (allowed != 0))[0]
    return int(idx[0]) if idx.size else -1


def leaving_bland(col: np.ndarray, rhs: np.ndarray, basis: np.ndarray,
                  tol: float) -> int:
    """Ratio-test row; ties broken by smallest basis variable id.  -1 if the
    column is nonpositive (unbounded direction)."""
    mask = col > tol
    if not mask.any():
        return -1
    ratios = np.full(col.shape[0], np.inf)
    ratios[mask] = rhs[mask] / col[mask]
    cand = np.nonzero(ratios == ratios.min())[0]
    return int(cand[np.argmin(basis[cand])])
