# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Dense simplex pivot kernel, compiled core.

Arithmetic matches the numpy fallback exactly (plain multiply-subtract per
element; the build forbids FMA contraction), so either kernel yields
bit-identical pivots.
"""
import numpy as np

cimport cython


def pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t c):
    """In-place Gauss-Jordan pivot of tableau T on element (r, c)."""
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t n = T.shape[1]
    cdef Py_ssize_t i, j
    cdef double piv = T[r, c]
    cdef double f
    for j in range(n):
        T[r, j] = T[r, j] / piv
    for i in range(m):
        if i == r:
            continue
        f = T[i, c]
        if f != 0.0:
            for j in range(n):
                T[i, j] = T[i, j] - f * T[r, j]
        T[i, c] = 0.0
    T[r, c] = 1.0


def entering_bland(double[::1] cost, unsigned char[::1] allowed, double tol):
    """Smallest-index allowed column with reduced cost < -tol, or -1."""
    cdef Py_ssize_t j
    for j in range(cost.shape[0]):
        if allowed[j] != 0 and cost[j] < -tol:
            return j
    return -1


def leaving_bland(double[::1] col, double[::1] rhs, long[::1] basis,
                  double tol):
    """Ratio-test row; ties broken by smallest basis variable id, -1 if the
    column is nonpositive."""
    cdef Py_ssize_t best = -1
    cdef double best_ratio = 0.0
    cdef double ratio
    cdef Py_ssize_t i
    for i in range(col.shape[0]):
        if col[i] > tol:
            ratio = rhs[i] / col[i]
            if best == -1 or ratio < best_ratio or (
                    ratio == best_ratio and basis[i] < basis[best]):
                best = i
                best_ratio = ratio
    return best
