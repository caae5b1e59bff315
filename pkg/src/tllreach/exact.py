"""Exact one-step reachable sets and exact one-step bounding boxes.

The controller is affine on each cell of the pairwise-difference hyperplane
arrangement; each cell maps through its own affine closed-loop map, yielding
the reachable set as a union of polytopes or, cheaper, a merged bounding box
via 2n LPs per cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tllreach.arrangement import Hyperplane, active_function, enumerate_cells
from tllreach.polytope import Box, HPolytope, SolverFailure, affine_image, solve_lp


@dataclass(frozen=True)
class ReachSet:
    """Union-of-polytopes reachable set with per-piece provenance."""

    pieces: tuple
    signs: tuple  # per piece: source cell sign vector
    active: tuple  # per piece: active function index per output

    def contains(self, points, tol=1e-7):
        """Mask over points (k, n): inside at least one piece within tol."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mask = np.zeros(pts.shape[0], dtype=bool)
        for piece in self.pieces:
            mask |= piece.contains(pts, tol=tol)
            if mask.all():
                break
        return mask

    def to_json(self):
        return {
            "pieces": [
                {
                    "C": p.C.tolist(),
                    "d": p.d.tolist(),
                    "signs": list(s),
                    "active": list(a),
                }
                for p, s, a in zip(self.pieces, self.signs, self.active)
            ]
        }


def difference_hyperplanes(ctrl):
    """Hyperplanes where two local linear functions of one output agree.

    ell_i = ell_j  <=>  (w_i - w_j) . x = b_j - b_i; parallel-distinct pairs
    contribute nothing (never equal) and are skipped.
    """
    hps = []
    for comp in ctrl.components:
        N = comp.N
        for i in range(N):
            for j in range(i + 1, N):
                w = comp.W[i] - comp.W[j]
                if np.max(np.abs(w)) == 0.0:
                    continue
                hps.append(Hyperplane(w, comp.b[j] - comp.b[i]))
    return hps


def _cells_with_active(ctrl, X_t, tau_cell):
    cells = enumerate_cells(difference_hyperplanes(ctrl), X_t, tau_cell=tau_cell)
    annotated = [
        (cell, active_function(ctrl, cell.witness)) for cell in cells
    ]
    # Canonical order: sort by sign vector for deterministic output.
    annotated.sort(key=lambda ca: ca[0].signs)
    return annotated


def _cell_affine_map(sys, ctrl, active):
    W_act = np.vstack([ctrl.components[k].W[i] for k, i in enumerate(active)])
    b_act = np.array([ctrl.components[k].b[i] for k, i in enumerate(active)])
    return sys.A + sys.B @ W_act, sys.B @ b_act


def one_step_exact(sys, ctrl, X_t, tau_cell=1e-8):
    """Reachable set {A x + B NN(x) : x in X_t} as a union of polytopes."""
    pieces, signs, actives = [], [], []
    for cell, active in _cells_with_active(ctrl, X_t, tau_cell):
        M, c = _cell_affine_map(sys, ctrl, active)
        pieces.append(affine_image(cell.region, M, c))
        signs.append(cell.signs)
        actives.append(active)
    return ReachSet(tuple(pieces), tuple(signs), tuple(actives))


def one_step_exact_bbox(sys, ctrl, X_t, tau_cell=1e-8):
    """Exact bounding box of the one-step reachable set (2n LPs per cell)."""
    n = sys.n
    result = Box.empty(n)
    for cell, active in _cells_with_active(ctrl, X_t, tau_cell):
        M, c = _cell_affine_map(sys, ctrl, active)
        lo = np.empty(n)
        hi = np.empty(n)
        for i in range(n):
            mn = solve_lp(M[i], cell.region, "min")
            mx = solve_lp(M[i], cell.region, "max")
            if not (mn.is_optimal and mx.is_optimal):
                raise SolverFailure("cell objective LP did not return an optimum")
            lo[i] = mn.value + c[i]
            hi[i] = mx.value + c[i]
        result = result.merge(Box(lo, hi))
    return result


def realized_functions(ctrl, domain, tau_cell=1e-8):
    """Per-output sets of local-function indices active on some cell.

    The controller is non-degenerate over the domain iff every index
    0..N-1 appears for every output.
    """
    realized = [set() for _ in range(ctrl.m)]
    for _, active in _cells_with_active(ctrl, domain, tau_cell):
        for k, i in enumerate(active):
            realized[k].add(i)
    return realized


def is_nondegenerate(ctrl, domain, tau_cell=1e-8):
    full = set(range(ctrl.N))
    return all(r == full for r in realized_functions(ctrl, domain, tau_cell))
