"""Output-range oracle for lattice controllers over polytopic input sets.

Upper bounds are exact epigraph LPs (max of a min of affines is LP-exact per
selector group).  Lower bounds go the combinatorial way: enumerate the cells
of the N threshold hyperplanes {ell_i = a} and check each cell for a selector
group that is entirely above threshold; a binary search on the threshold then
brackets the true minimum.  This uses N hyperplanes rather than the O(N^2)
pairwise differences needed for exact region enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tllreach.arrangement import Hyperplane, enumerate_cells_merged
from tllreach.polytope import (
    Box,
    SolverFailure,
    _solve_raw,
    center_extent,
    chebyshev_center,
)
from tllreach.tll import eval_scalar, scalar_lipschitz_bound

_MAX_BISECTIONS = 200


@dataclass(frozen=True)
class OutputBox:
    """Per-output interval bounds: hi exact, lo within slack of the true min."""

    lo: np.ndarray
    hi: np.ndarray
    slack: float

    def as_box(self):
        return Box(self.lo, self.hi)


def verify_lower_bound(tll, P, a, tau_cell=1e-8, prebounds=None):
    """Decide NN(x) >= a for all x in P; on failure also return a witness.

    Returns (True, None) or (False, witness_point).  A cell passes iff some
    selector group has every member strictly above the threshold there; since
    a failing cell has every group dipping below a at the cell witness, that
    witness is a genuine counterexample.

    prebounds, when given, is an (N, 2) array of sound [lower, upper] bounds
    of each local function over P; functions provably on one side of the
    threshold then contribute a fixed sign instead of a hyperplane.
    """
    fixed = {}
    hps = []
    idx_of = {}
    for i in range(tll.N):
        w = tll.W[i]
        if np.max(np.abs(w)) == 0.0:
            fixed[i] = 1 if tll.b[i] >= a else -1
        elif prebounds is not None and prebounds[i, 0] >= a:
            fixed[i] = 1
        elif prebounds is not None and prebounds[i, 1] < a:
            fixed[i] = -1
        else:
            idx_of[i] = len(hps)
            hps.append(Hyperplane(w, a - tll.b[i]))
    cells, _, mapping = enumerate_cells_merged(hps, P, tau_cell=tau_cell)
    if not cells:
        # P is empty or too thin to carry any strict cell; decide at a point.
        center, _ = chebyshev_center(P)
        if center is None:
            return True, None
        if eval_scalar(tll, center) >= a:
            return True, None
        return False, center
    for cell in cells:
        ok = False
        for s in tll.selectors:
            group_pos = True
            for i in s:
                if i in fixed:
                    sign = fixed[i]
                else:
                    merged_idx, orient = mapping[idx_of[i]]
                    sign = orient * cell.signs[merged_idx]
                if sign < 0:
                    group_pos = False
                    break
            if group_pos:
                ok = True
                break
        if not ok:
            return False, cell.witness
    return True, None


def output_max(tll, P):
    """Exact maximum of NN over P: one epigraph LP per selector group."""
    n = P.dim
    best = -np.inf
    for s in tll.selectors:
        # Variables (x, t): maximize t subject to t <= w_i.x + b_i, x in P.
        rows = np.hstack([-tll.W[list(s)], np.ones((len(s), 1))])
        A = np.vstack([np.hstack([P.C, np.zeros((P.C.shape[0], 1))]), rows])
        b = np.concatenate([P.d, tll.b[list(s)]])
        c = np.zeros(n + 1)
        c[-1] = 1.0
        out = _solve_raw(c, A, b, "max")
        if out.status == "infeasible":
            raise ValueError("output_max over an empty polytope")
        if not out.is_optimal:
            raise SolverFailure("epigraph LP did not return an optimum")
        best = max(best, out.value)
    return float(best)


def _min_bracket(tll, P):
    """Initial [lo, hi] bracket for the minimum of NN over P."""
    center, _ = chebyshev_center(P)
    if center is None:
        raise ValueError("output_min over an empty polytope")
    hi = eval_scalar(tll, center)
    _, _, ext = center_extent(P)
    lo = hi - scalar_lipschitz_bound(tll) * 2.0 * ext
    return lo, hi


def output_min(tll, P, tol, tau_cell=1e-8):
    """Lower bound lo with the true minimum inside [lo, lo + tol].

    Binary search on the threshold of verify_lower_bound; counterexample
    values tighten the upper bracket beyond plain bisection.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    lo, hi = _min_bracket(tll, P)
    for _ in range(_MAX_BISECTIONS):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        ok, witness = verify_lower_bound(tll, P, mid, tau_cell=tau_cell)
        if ok:
            lo = mid
        else:
            hi = min(hi, eval_scalar(tll, witness))
            if hi < lo:
                lo = hi
    return float(lo)


def output_box(ctrl, P, tol, tau_cell=1e-8):
    """Per-output [min - tol, max] interval box over P."""
    lo = np.array([output_min(c, P, tol, tau_cell=tau_cell) for c in ctrl.components])
    hi = np.array([output_max(c, P) for c in ctrl.components])
    return OutputBox(lo, hi, tol)
