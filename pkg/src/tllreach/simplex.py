"""Dense two-phase tableau simplex, JIT-compiled for small problems.

The LP workload here is millions of tiny problems (2-6 variables, tens of
rows); generic solver wrappers spend more time building models than solving
them.  This kernel solves the dual in equality standard form (basis size =
number of primal variables) and hands back enough information for the caller
to verify a full optimality or infeasibility certificate before trusting the
answer; anything unverifiable falls back to the scipy backend.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Status codes returned by eq_simplex.
OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
FAILURE = 3


@njit(cache=True)
def _pivot(T, basis, row, col):
    k = basis.size
    piv = T[row, col]
    T[row] /= piv
    for i in range(k + 1):
        if i != row:
            f = T[i, col]
            if f != 0.0:
                T[i] -= f * T[row]
    basis[row] = col


@njit(cache=True)
def _run(T, basis, ncols, tol, max_iter, bland_after):
    """Iterate to optimality over columns [0, ncols). Returns status."""
    k = basis.size
    last = T.shape[1] - 1
    for it in range(max_iter):
        # Entering column: Dantzig early, Bland once cycling is plausible.
        enter = -1
        if it < bland_after:
            best = -tol
            for j in range(ncols):
                if T[k, j] < best:
                    best = T[k, j]
                    enter = j
        else:
            for j in range(ncols):
                if T[k, j] < -tol:
                    enter = j
                    break
        if enter < 0:
            return OPTIMAL
        # Ratio test; ties to the smallest basis index (anti-cycling).
        leave = -1
        best_ratio = 0.0
        for i in range(k):
            a = T[i, enter]
            if a > tol:
                ratio = T[i, last] / a
                if leave < 0 or ratio < best_ratio - 1e-12 or (
                    ratio < best_ratio + 1e-12 and basis[i] < basis[leave]
                ):
                    leave = i
                    best_ratio = ratio
        if leave < 0:
            return UNBOUNDED
        _pivot(T, basis, leave, enter)
    return FAILURE


@njit(cache=True)
def eq_simplex(A, b, c, tol, max_iter):
    """min c . y  s.t.  A y = b, y >= 0 with A of shape (k, p).

    Returns (status, y, basis, ray); ray is a recession direction with
    c . ray < 0 when status is UNBOUNDED, else zeros.
    """
    k, p = A.shape
    y = np.zeros(p)
    ray = np.zeros(p)
    T = np.zeros((k + 1, p + k + 1))
    basis = np.empty(k, dtype=np.int64)
    for i in range(k):
        s = -1.0 if b[i] < 0.0 else 1.0
        for j in range(p):
            T[i, j] = s * A[i, j]
        T[i, p + i] = 1.0
        T[i, p + k] = s * b[i]
        basis[i] = p + i
    # Phase-1 reduced costs for the all-artificial basis.
    for j in range(p + k + 1):
        ssum = 0.0
        for i in range(k):
            ssum += T[i, j]
        T[k, j] = -ssum
    for i in range(k):
        T[k, p + i] = 0.0
    bland = 5 * (p + k) + 20
    st = _run(T, basis, p, tol, max_iter, bland)
    if st == FAILURE or st == UNBOUNDED:
        # Phase 1 is bounded below by zero; an unbounded report is numerical.
        return FAILURE, y, basis, ray
    if T[k, p + k] < -tol:
        return INFEASIBLE, y, basis, ray
    # Drive artificials out of the basis where a real pivot exists; rows
    # where none exists are redundant and stay parked at level zero.
    for i in range(k):
        if basis[i] >= p:
            piv = -1
            for j in range(p):
                if abs(T[i, j]) > 1e3 * tol:
                    piv = j
                    break
            if piv >= 0:
                _pivot(T, basis, i, piv)
    # Phase-2 reduced costs for the true objective.
    for j in range(p + k + 1):
        z = 0.0
        for i in range(k):
            if basis[i] < p:
                z += c[basis[i]] * T[i, j]
        if j < p:
            T[k, j] = c[j] - z
        else:
            T[k, j] = -z if j == p + k else 0.0
    for i in range(k):
        if basis[i] < p:
            T[k, basis[i]] = 0.0
    st = _run(T, basis, p, tol, max_iter, bland)
    if st == FAILURE:
        return FAILURE, y, basis, ray
    if st == UNBOUNDED:
        # Recover the unbounded entering column for a Farkas certificate.
        last = p + k
        enter = -1
        for j in range(p):
            if T[k, j] < -tol:
                ok = True
                for i in range(k):
                    if T[i, j] > tol:
                        ok = False
                        break
                if ok:
                    enter = j
                    break
        if enter < 0:
            return FAILURE, y, basis, ray
        ray[enter] = 1.0
        for i in range(k):
            if basis[i] < p:
                ray[basis[i]] = -T[i, enter]
        return UNBOUNDED, y, basis, ray
    for i in range(k):
        if basis[i] < p:
            y[basis[i]] = T[i, p + k]
    return OPTIMAL, y, basis, ray


def warmup():
    """Trigger JIT compilation once (cached across processes)."""
    A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, 1.0])
    c = np.array([1.0, 1.0, 0.0])
    eq_simplex(A, b, c, 1e-9, 100)
