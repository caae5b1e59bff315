"""One-step bounding boxes by Lipschitz gridding of the state set.

The state set is covered with axis-aligned cubes of edge eps / (2 |B| L); on
each nonempty cube intersection P the controller output is frozen at the
Chebyshev center and the contribution box(A P) + B mu(center) is inflated by
eps/2, which suffices for an eps-tight bounding box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tllreach.polytope import (
    Box,
    HPolytope,
    bbox,
    center_extent,
    chebyshev_center,
    intersect,
    solve_lp,
)

DEFAULT_CUBE_CAP = 10_000_000


class CostGuardError(RuntimeError):
    """Estimated grid size exceeds the configured cap; use another method."""


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the covering grid for one gridded bounding-box call."""

    epsilon: float
    lip: float
    b_norm: float
    width: float  # cube edge; inf in the degenerate single-cell case
    cube_count: float

    @property
    def single_cell(self):
        return not np.isfinite(self.width)


def grid_spec(sys, lip, X_t, epsilon):
    b_norm = float(np.max(np.abs(sys.B).sum(axis=1))) if sys.B.size else 0.0
    _, _, ext = center_extent(X_t)
    if b_norm * lip <= 0.0:
        return GridSpec(epsilon, lip, b_norm, np.inf, 1.0)
    width = epsilon / (2.0 * b_norm * lip)
    count = float((2.0 * ext * 2.0 * b_norm * lip / epsilon) ** sys.n)
    return GridSpec(epsilon, lip, b_norm, width, max(count, 1.0))


def _mu_batch(mu, mu_batch, points):
    if mu_batch is not None:
        return np.atleast_2d(np.asarray(mu_batch(points), dtype=float))
    return np.stack([np.atleast_1d(np.asarray(mu(p), dtype=float)) for p in points])


def one_step_grid_bbox(
    sys,
    mu,
    lip,
    X_t,
    epsilon,
    *,
    mu_batch=None,
    cube_cap=DEFAULT_CUBE_CAP,
    tol=1e-9,
):
    """Eps-tight bounding box of {A x + B mu(x) : x in X_t} by gridding.

    mu maps a single point to the control vector; pass mu_batch for a
    vectorized (k, n) -> (k, m) evaluator to speed up interior cubes.  lip
    must dominate the true max-norm Lipschitz constant of mu on X_t.
    """
    if lip < 0.0:
        raise ValueError("lip must be nonnegative")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    A = sys.A
    n = sys.n
    domain_box = bbox(X_t)
    if domain_box.is_empty:
        return Box.empty(n)
    spec = grid_spec(sys, lip, X_t, epsilon)

    if spec.single_cell:
        # B or lip vanishes: the controller term is constant through B.
        center, _ = chebyshev_center(X_t)
        out = _box_of_affine(A, X_t)
        u = _mu_batch(mu, mu_batch, center[None, :])[0]
        return out.translate(sys.B @ u).inflate(epsilon / 2.0)

    counts = np.maximum(np.ceil(domain_box.width / spec.width - 1e-12), 1).astype(int)
    total = float(np.prod(counts.astype(float)))
    if total > cube_cap:
        raise CostGuardError(
            f"grid would need {total:.3g} cubes (cap {cube_cap:.3g}); "
            "use the exact-box or adaptive method instead"
        )
    half = spec.width / 2.0

    # All cube centers on the regular grid anchored at the bbox lower corner.
    axes = [domain_box.lo[i] + spec.width * (np.arange(counts[i]) + 0.5) for i in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([m.reshape(-1) for m in mesh], axis=1)

    # Interval classification against the domain rows: a cube is definitely
    # empty if some row's minimum over the cube exceeds d, definitely inside
    # if every row's maximum stays below d.
    G = centers @ X_t.C.T
    R = half * np.abs(X_t.C).sum(axis=1)
    empty = np.any(G - R > X_t.d + tol, axis=1)
    inside = np.all(G + R <= X_t.d + tol, axis=1)
    boundary = ~empty & ~inside

    result = Box.empty(n)
    absA_half = half * np.abs(A).sum(axis=1)

    if np.any(inside):
        pts = centers[inside]
        U = _mu_batch(mu, mu_batch, pts)
        shift = U @ sys.B.T
        img = pts @ A.T + shift
        lo = (img - absA_half).min(axis=0)
        hi = (img + absA_half).max(axis=0)
        result = result.merge(Box(lo, hi))

    for c in centers[boundary]:
        cube = HPolytope.from_box(Box(c - half, c + half))
        P = intersect(cube, X_t)
        q_c, radius = chebyshev_center(P)
        if q_c is None or radius < -tol:
            continue
        part = _box_of_affine(A, P)
        if part.is_empty:
            continue
        u = _mu_batch(mu, mu_batch, q_c[None, :])[0]
        result = result.merge(part.translate(sys.B @ u))

    if result.is_empty:
        return result
    return result.inflate(epsilon / 2.0)


def _box_of_affine(A, P):
    """Bounding box of {A x : x in P} via 2n LPs."""
    n = A.shape[0]
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        mn = solve_lp(A[i], P, "min")
        if not mn.is_optimal:
            return Box.empty(n)
        mx = solve_lp(A[i], P, "max")
        lo[i] = mn.value
        hi[i] = mx.value
    return Box(lo, hi)

