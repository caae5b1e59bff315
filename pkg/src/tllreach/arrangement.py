"""Full-dimensional cell enumeration for hyperplane arrangements on a polytope.

Cells are explored breadth-first by flipping one hyperplane sign at a time
from a seed cell containing an interior point of the domain; every candidate
sign vector is certified full-dimensional by a max-slack interior LP.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from tllreach.polytope import HPolytope, _solve_raw, chebyshev_center

TAU_CELL = 1e-8


@dataclass(frozen=True)
class Hyperplane:
    """{x : w . x = b} with w != 0."""

    w: np.ndarray
    b: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).reshape(-1)
        if np.max(np.abs(w)) == 0.0:
            raise ValueError("hyperplane normal must be nonzero")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))


@dataclass(frozen=True)
class Cell:
    """One full-dimensional arrangement cell restricted to the domain.

    signs[k] is +1/-1 for w_k . x > b_k resp. < b_k on the cell interior;
    witness satisfies every signed constraint with margin >= tau_cell.
    """

    signs: tuple
    region: HPolytope
    witness: np.ndarray
    active: tuple | None = None


def normalize_hyperplanes(hyperplanes, tol=1e-9):
    """Scale-normalize and merge duplicate hyperplanes.

    Normal form: max-norm 1 with the first nonzero entry positive.  Returns
    (merged, mapping) where mapping[i] = (merged index, orientation) such that
    hyperplane i equals orientation * merged one.
    """
    merged = []
    keys = []
    mapping = []
    for h in hyperplanes:
        scale = np.max(np.abs(h.w))
        w = h.w / scale
        b = h.b / scale
        first = w[np.flatnonzero(np.abs(w) > tol)[0]]
        orient = 1
        if first < 0:
            w, b, orient = -w, -b, -1
        match = None
        for idx, (wk, bk) in enumerate(keys):
            if np.max(np.abs(w - wk)) <= tol and abs(b - bk) <= tol:
                match = idx
                break
        if match is None:
            keys.append((w, b))
            merged.append(Hyperplane(w, b))
            match = len(merged) - 1
        mapping.append((match, orient))
    return merged, mapping


def _cell_region(W, bvec, signs, domain):
    # Signed half-space s (w.x - b) >= 0  ==  -s w . x <= -s b.
    s = np.asarray(signs, dtype=float)
    C = np.vstack([domain.C, -s[:, None] * W])
    d = np.concatenate([domain.d, -s * bvec])
    return HPolytope(C, d)


def _witness_lp(W, bvec, signs, domain, tau_cell):
    """Max-slack LP over (x, t): s (w.x - b) >= t, x in domain, t <= 1."""
    n = domain.dim
    K = W.shape[0]
    s = np.asarray(signs, dtype=float)
    A = np.vstack(
        [
            np.hstack([domain.C, np.zeros((domain.C.shape[0], 1))]),
            np.hstack([-s[:, None] * W, np.ones((K, 1))]),
            np.hstack([np.zeros((1, n)), np.ones((1, 1))]),
        ]
    )
    b = np.concatenate([domain.d, -s * bvec, [1.0]])
    c = np.zeros(n + 1)
    c[-1] = 1.0
    out = _solve_raw(c, A, b, "max")
    if out.is_optimal and out.value >= tau_cell:
        return out.point[:n]
    return None


def enumerate_cells(hyperplanes, domain, tau_cell=TAU_CELL):
    """Yield every full-dimensional cell of the arrangement inside the domain.

    Duplicate hyperplanes (up to scaling) are merged first; reported sign
    vectors refer to the merged list, available as the `merged` attribute of
    the returned generator via enumerate_cells_merged for callers that need
    the index mapping.
    """
    cells, _, _ = _enumerate(hyperplanes, domain, tau_cell)
    return cells


def enumerate_cells_merged(hyperplanes, domain, tau_cell=TAU_CELL):
    """Like enumerate_cells but also returns (merged hyperplanes, mapping)."""
    return _enumerate(hyperplanes, domain, tau_cell)


def _seed_candidates(W, bvec, center):
    vals = W @ center - bvec
    base = np.where(vals >= 0.0, 1, -1)
    yield tuple(int(s) for s in base)
    ties = np.flatnonzero(np.abs(vals) <= 1e-9)
    for i in ties:
        alt = base.copy()
        alt[i] = -alt[i]
        yield tuple(int(s) for s in alt)
    yield tuple(int(-s) for s in base)


def _enumerate(hyperplanes, domain, tau_cell):
    merged, mapping = normalize_hyperplanes(hyperplanes)
    K = len(merged)
    cells = []
    if K == 0:
        center, _ = chebyshev_center(domain)
        if center is not None:
            cells.append(Cell((), domain, center))
        return cells, merged, mapping
    W = np.vstack([h.w for h in merged])
    bvec = np.array([h.b for h in merged])
    # Feasibility (not strict interior) suffices to seed: the per-cell slack
    # LP enforces the tau_cell margin against every hyperplane.
    center, _ = chebyshev_center(domain)
    if center is None:
        return cells, merged, mapping
    root = None
    for cand in _seed_candidates(W, bvec, center):
        wit = _witness_lp(W, bvec, cand, domain, tau_cell)
        if wit is not None:
            root = (cand, wit)
            break
    if root is None:
        return cells, merged, mapping
    visited = {root[0]}
    queue = deque([root])
    while queue:
        signs, wit = queue.popleft()
        cells.append(Cell(signs, _cell_region(W, bvec, signs, domain), wit))
        for k in range(K):
            cand = list(signs)
            cand[k] = -cand[k]
            cand = tuple(cand)
            if cand in visited:
                continue
            visited.add(cand)
            cwit = _witness_lp(W, bvec, cand, domain, tau_cell)
            if cwit is not None:
                queue.append((cand, cwit))
    return cells, merged, mapping


def active_function(ctrl, witness):
    """Index of the realized local linear function per output at a point.

    Per output: argmin within each selector group, then argmax over groups;
    exact ties resolve to the lowest index.  Meaningful when the point lies
    in a cell interior of the pairwise-difference arrangement.
    """
    witness = np.asarray(witness, dtype=float).reshape(-1)
    out = []
    for comp in ctrl.components:
        vals = comp.W @ witness + comp.b
        best_val = -np.inf
        best_idx = None
        for s in comp.selectors:
            sub = [vals[i] for i in s]
            j = int(np.argmin(sub))
            if sub[j] > best_val:
                best_val = sub[j]
                best_idx = s[j]
        out.append(best_idx)
    return tuple(out)
