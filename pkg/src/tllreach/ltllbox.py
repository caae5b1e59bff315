"""Adaptive bounding-box recursion, method auto-selection and propagation.

The adaptive method subdivides a root hypercube around the state set; a cube
is accepted once the controller's output box, pushed through B, is provably
narrower than epsilon per state coordinate, at which point the cube's
contribution box(A (cube intersect X_t)) + B * output-box is merged into the
global result.  At the depth bound the Lipschitz fallback accepts
unconditionally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tllreach.lipgrid import _box_of_affine, grid_spec, one_step_grid_bbox
from tllreach.polytope import (
    LP_CALLS,
    Box,
    HPolytope,
    center_extent,
    chebyshev_center,
    interval_matvec,
    intersect,
)
from tllreach.tll import eval_scalar, evaluate, evaluate_many, lipschitz_bound
from tllreach.verifier import OutputBox, _min_bracket, output_max, verify_lower_bound
from tllreach.exact import one_step_exact_bbox


@dataclass(frozen=True)
class CostEstimate:
    """Predicted operation counts for the one-step box methods."""

    method: str  # "exact_box" | "grid" | "ltllbox"
    predicted_ops: float
    exact_ops: float
    grid_ops: float

    def to_json(self):
        return {
            "method": self.method,
            "predicted_ops": self.predicted_ops,
            "exact_ops": self.exact_ops,
            "grid_ops": self.grid_ops,
        }


def _lp_cost(eta, nu):
    # Dimensionless LP cost model LP(eta, nu) ~ eta * nu^2.
    return float(eta) * float(nu) ** 2


def select_method(sys, ctrl, X_t, epsilon, band=10.0):
    """Pick the cheaper of the exact-box and grid cost estimates.

    When the two estimates are within `band` of each other neither dominates
    and the adaptive method is returned.
    """
    n, m, N, M = sys.n, ctrl.m, ctrl.N, ctrl.M
    eta = X_t.n_rows
    exact_ops = (
        m ** (n + 2)
        * n**2
        * M
        * N ** (2 * n + 3)
        * _lp_cost(m * N**2 + eta, n)
        / math.factorial(n)
    )
    spec = grid_spec(sys, lipschitz_bound(ctrl), X_t, epsilon)
    grid_ops = spec.cube_count * _lp_cost(2 * n, n)
    lo, hi = sorted([exact_ops, grid_ops])
    if lo <= 0.0 or hi / lo <= band:
        method = "ltllbox"
        predicted = min(exact_ops, grid_ops)
    elif exact_ops < grid_ops:
        method, predicted = "exact_box", exact_ops
    else:
        method, predicted = "grid", grid_ops
    return CostEstimate(method, predicted, exact_ops, grid_ops)


def _function_bounds(comp, cube):
    """Sound [lower, upper] bounds of each local function over a cube."""
    center = cube.center
    r = 0.5 * cube.width
    mid = comp.W @ center + comp.b
    rad = np.abs(comp.W) @ r
    return np.stack([mid - rad, mid + rad], axis=1)


def _decide_node(ctrl, B, region, cube, epsilon, tau_cell):
    """Width test for one recursion node, refining only until decidable.

    Returns (accept, OutputBox or None).  The output-box lower bounds are
    bisected lazily: as soon as even the optimistic bracket fails the width
    test the node is rejected, and a pessimistic pass accepts early with a
    sound (possibly looser, still sub-epsilon) box.
    """
    tol = epsilon / 2.0
    absB = np.abs(B)
    hi = np.array([output_max(c, region) for c in ctrl.components])
    brackets = []
    for c in ctrl.components:
        lo_b, hi_b = _min_bracket(c, region)
        brackets.append([min(lo_b, hi[len(brackets)]), min(hi_b, hi[len(brackets)])])
    brackets = np.array(brackets, dtype=float)  # (m, 2): [lo, hi] on the min
    while True:
        w_opt = absB @ (hi - brackets[:, 1])
        if np.any(w_opt >= epsilon):
            return False, None
        w_pes = absB @ (hi - brackets[:, 0])
        if np.all(w_pes < epsilon):
            return True, OutputBox(brackets[:, 0].copy(), hi, tol)
        gaps = brackets[:, 1] - brackets[:, 0]
        weights = np.max(absB, axis=0) * gaps
        refinable = gaps > tol
        if not np.any(refinable):
            # Brackets at full tol resolution: final verdict on the real box.
            return False, None
        k = int(np.argmax(np.where(refinable, weights, -np.inf)))
        lo_b, hi_b = brackets[k]
        mid = 0.5 * (lo_b + hi_b)
        ok, witness = verify_lower_bound(
            ctrl.components[k],
            region,
            mid,
            tau_cell=tau_cell,
            prebounds=_function_bounds(ctrl.components[k], cube),
        )
        if ok:
            brackets[k, 0] = mid
        else:
            val = eval_scalar(ctrl.components[k], witness)
            brackets[k, 1] = min(brackets[k, 1], val)
            brackets[k, 0] = min(brackets[k, 0], brackets[k, 1])


def _children(cube):
    n = cube.dim
    half = 0.25 * cube.width  # children half-edge
    center = cube.center
    kids = []
    for mask in range(2**n):
        offs = np.array([(1.0 if mask >> i & 1 else -1.0) for i in range(n)])
        c = center + offs * half
        kids.append(Box(c - half, c + half))
    return kids


def _maybe_empty(cube, X_t, tol=1e-9):
    """Interval prefilter: True when cube certainly misses X_t."""
    c = cube.center
    r = 0.5 * cube.width
    lower = X_t.C @ c - np.abs(X_t.C) @ r
    return bool(np.any(lower > X_t.d + tol))


def one_step_ltllbox(sys, ctrl, X_t, epsilon, tau_cell=1e-8, stats=None):
    """Eps-tight one-step bounding box via adaptive cube refinement."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    n = sys.n
    center, _, ext = center_extent(X_t)
    lip = lipschitz_bound(ctrl)
    b_norm = float(np.max(np.abs(sys.B).sum(axis=1))) if sys.B.size else 0.0
    if b_norm * lip * ext > 0.0:
        k_max = max(0, math.ceil(math.log2(2.0 * ext * 2.0 * b_norm * lip / epsilon)))
    else:
        k_max = 0
    root = Box(center - ext, center + ext)
    result = Box.empty(n)
    nodes = 0
    forced = 0
    max_depth = 0
    lp_before = LP_CALLS.snapshot()
    stack = [(root, 0)]
    while stack:
        cube, depth = stack.pop()
        if _maybe_empty(cube, X_t):
            continue
        region = intersect(HPolytope.from_box(cube), X_t)
        q_c, _ = chebyshev_center(region)
        if q_c is None:
            continue
        nodes += 1
        max_depth = max(max_depth, depth)
        if depth >= k_max:
            accept, out_box = (False, None) if k_max > 0 else _decide_node(
                ctrl, sys.B, region, cube, epsilon, tau_cell
            )
            if not accept:
                # Lipschitz fallback: the cube edge is below the gridding
                # width, so freezing the control at an interior point is
                # sound after eps/2 inflation.
                part = _box_of_affine(sys.A, region)
                if not part.is_empty:
                    u = evaluate(ctrl, q_c)
                    contribution = part.translate(sys.B @ u).inflate(epsilon / 2.0)
                    result = result.merge(contribution)
                forced += 1
                continue
        else:
            accept, out_box = _decide_node(ctrl, sys.B, region, cube, epsilon, tau_cell)
        if accept:
            part = _box_of_affine(sys.A, region)
            if not part.is_empty:
                result = result.merge(part.add(interval_matvec(sys.B, out_box.as_box())))
        else:
            for kid in reversed(_children(cube)):
                stack.append((kid, depth + 1))
    if stats is not None:
        stats["nodes"] = nodes
        stats["forced_accepts"] = forced
        stats["max_depth"] = max_depth
        stats["depth_bound"] = k_max
        stats["lp_calls"] = LP_CALLS.snapshot() - lp_before
    return result


class PropagationError(RuntimeError):
    """A propagation step failed; the completed prefix is attached."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class PropagationResult:
    boxes: tuple  # B_1 .. B_T
    methods: tuple  # method actually used per step
    stats: tuple  # per-step dicts (nodes, lp_calls, estimates ...)


def _one_step(sys, ctrl, X_t, epsilon, method, tau_cell):
    stats = {}
    lp_before = LP_CALLS.snapshot()
    if method == "auto":
        est = select_method(sys, ctrl, X_t, epsilon)
        stats["estimates"] = est.to_json()
        method = est.method
    if method == "exact_box":
        box = one_step_exact_bbox(sys, ctrl, X_t, tau_cell=tau_cell)
    elif method == "grid":
        box = one_step_grid_bbox(
            sys,
            lambda x: evaluate(ctrl, x),
            lipschitz_bound(ctrl),
            X_t,
            epsilon,
            mu_batch=lambda X: evaluate_many(ctrl, X),
        )
    elif method == "ltllbox":
        box = one_step_ltllbox(sys, ctrl, X_t, epsilon, tau_cell=tau_cell, stats=stats)
    else:
        raise ValueError(f"unknown method {method!r}")
    stats["lp_calls"] = LP_CALLS.snapshot() - lp_before
    return box, method, stats


def propagate(sys, ctrl, X_0, epsilon, T, method="ltllbox", tau_cell=1e-8):
    """Multi-step bounding-box propagation: B_0 = X_0, B_t from B_{t-1}.

    Returns a PropagationResult with boxes [B_1 .. B_T]; any step failure
    raises PropagationError carrying the completed prefix.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    boxes, methods, stats = [], [], []
    current = X_0
    for t in range(T):
        try:
            box, used, st = _one_step(sys, ctrl, current, epsilon, method, tau_cell)
        except Exception as exc:
            raise PropagationError(
                f"propagation failed at step {t + 1}: {exc}",
                PropagationResult(tuple(boxes), tuple(methods), tuple(stats)),
            ) from exc
        if box.is_empty:
            raise PropagationError(
                f"empty reach box at step {t + 1}",
                PropagationResult(tuple(boxes), tuple(methods), tuple(stats)),
            )
        boxes.append(box)
        methods.append(used)
        stats.append(st)
        current = HPolytope.from_box(box)
    return PropagationResult(tuple(boxes), tuple(methods), tuple(stats))
