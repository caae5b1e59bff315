"""H-representation polytope calculus backed by a linear-programming kernel.

Polytopes are {x : C x <= d}.  All vector norms are max-norms and all induced
matrix norms are max absolute row sums, consistently with the rest of the
package.  LPs are solved with scipy's HiGHS backend, which is deterministic
for a fixed input.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

# Default tolerances: feasibility slack, LP value slack, and the relative
# singularity cutoff used by affine_image's invertible fast path.
TAU_FEAS = 1e-9
TAU_LP = 1e-9
TAU_SING = 1e-12


class SolverFailure(RuntimeError):
    """The LP backend failed to produce a trustworthy answer."""


class _LPCounter:
    """Process-wide tally of LP solves, for benchmark statistics."""

    def __init__(self):
        self.count = 0

    def snapshot(self):
        return self.count


LP_CALLS = _LPCounter()


@dataclass(frozen=True)
class Box:
    """Axis-aligned interval vector [lo_1, hi_1] x ... x [lo_n, hi_n]."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float).reshape(-1))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float).reshape(-1))
        if self.lo.shape != self.hi.shape:
            raise ValueError("box bounds must have equal length")

    @staticmethod
    def empty(n):
        """Merge identity: every merge with it returns the other operand."""
        return Box(np.full(n, np.inf), np.full(n, -np.inf))

    @property
    def dim(self):
        return self.lo.size

    @property
    def is_empty(self):
        return bool(np.any(self.lo > self.hi))

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    def merge(self, other):
        return Box(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def translate(self, v):
        v = np.asarray(v, dtype=float).reshape(-1)
        return Box(self.lo + v, self.hi + v)

    def inflate(self, eps):
        return Box(self.lo - eps, self.hi + eps)

    def add(self, other):
        """Minkowski sum of two boxes (coordinate-wise interval addition)."""
        return Box(self.lo + other.lo, self.hi + other.hi)

    def contains(self, points, tol=0.0):
        """Boolean mask over points (k, n) that lie inside within tol."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)

    def to_json(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True)
class HPolytope:
    """Convex polytope {x : C x <= d} in H-representation."""

    C: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        d = np.asarray(self.d, dtype=float).reshape(-1)
        if C.shape[0] != d.size:
            raise ValueError("constraint matrix and offset sizes disagree")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "d", d)

    @property
    def dim(self):
        return self.C.shape[1]

    @property
    def n_rows(self):
        return self.C.shape[0]

    @staticmethod
    def from_box(box):
        n = box.dim
        eye = np.eye(n)
        return HPolytope(np.vstack([eye, -eye]), np.concatenate([box.hi, -box.lo]))

    def contains(self, points, tol=TAU_FEAS):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(pts @ self.C.T <= self.d + tol, axis=1)

    def to_json(self):
        return {"C": self.C.tolist(), "d": self.d.tolist()}

    @staticmethod
    def from_json(obj):
        return HPolytope(np.asarray(obj["C"], dtype=float), np.asarray(obj["d"], dtype=float))


@dataclass(frozen=True)
class LPOutcome:
    """Trichotomous LP result: Optimal(value, point), Infeasible or Unbounded."""

    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float | None = None
    point: np.ndarray | None = None

    @property
    def is_optimal(self):
        return self.status == "optimal"


def solve_lp(objective, P, sense="min"):
    """Optimize objective . x over the polytope P.

    Returns an LPOutcome; raises SolverFailure only when the backend reports a
    numerical breakdown (never silently).
    """
    c = np.asarray(objective, dtype=float).reshape(-1)
    if c.size != P.dim:
        raise ValueError("objective dimension does not match polytope")
    return _solve_raw(c, P.C, P.d, sense)


def _solve_raw(c, A_ub, b_ub, sense):
    LP_CALLS.count += 1
    sign = 1.0 if sense == "min" else -1.0
    if A_ub.shape[0] == 0:
        # No constraints: any nonzero objective is unbounded.
        if np.all(c == 0.0):
            return LPOutcome("optimal", 0.0, np.zeros(c.size))
        return LPOutcome("unbounded")
    fast = _fast_lp(sign * c, A_ub, b_ub)
    if fast is not None:
        if sense == "max" and fast.is_optimal:
            return LPOutcome("optimal", -fast.value, fast.point)
        return fast
    res = linprog(sign * c, A_ub=A_ub, b_ub=b_ub, bounds=(None, None), method="highs")
    if res.status == 0:
        return LPOutcome("optimal", sign * res.fun, np.asarray(res.x))
    if res.status == 2:
        return LPOutcome("infeasible")
    if res.status == 3:
        return LPOutcome("unbounded")
    raise SolverFailure(f"LP backend failed: {res.message}")


_FAST_MAX_VARS = 8
_FAST_MAX_ROWS = 800
_FAST_TOL = 1e-9
_CERT_TOL = 1e-7


def _fast_lp(c, A, b):
    """Small-LP fast path: min c . x over {A x <= b} via the dual simplex kernel.

    Solves min b.y s.t. A^T y = -c, y >= 0 and reconstructs the primal vertex
    from the optimal basis.  Every answer is accepted only with a verified
    certificate (primal/dual feasibility + zero gap, or a Farkas ray);
    returns None to defer to the scipy backend otherwise.
    """
    from tllreach import simplex as sx

    m, n = A.shape
    if n > _FAST_MAX_VARS or m > _FAST_MAX_ROWS:
        return None
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)) or not np.all(np.isfinite(c)):
        return None
    if np.max(np.abs(c)) == 0.0:
        return None  # pure feasibility: no vertex recovery from the dual
    scale = max(1.0, np.max(np.abs(b)), np.max(np.abs(c)), np.max(np.abs(A)))
    status, y, basis, ray = sx.eq_simplex(
        np.ascontiguousarray(A.T), -c, b, _FAST_TOL * scale, 50 * (m + n) + 200
    )
    if status == sx.OPTIMAL:
        active = basis[basis < m]
        if active.size != n:
            return None
        try:
            x = np.linalg.solve(A[active], b[active])
        except np.linalg.LinAlgError:
            return None
        tol = _CERT_TOL * scale
        if np.any(A @ x - b > tol):
            return None
        if np.any(y < -tol) or np.max(np.abs(A.T @ y + c)) > tol:
            return None
        if abs(c @ x + b @ y) > _CERT_TOL * max(scale, abs(c @ x)):
            return None
        return LPOutcome("optimal", float(c @ x), x)
    if status == sx.UNBOUNDED:
        # Dual recession ray is a Farkas certificate of primal infeasibility.
        tol = _CERT_TOL * max(1.0, np.max(np.abs(ray)))
        if (
            np.all(ray >= -tol)
            and np.max(np.abs(A.T @ ray)) <= tol * scale
            and b @ ray < -_FAST_TOL
        ):
            return LPOutcome("infeasible")
        return None
    return None


def is_feasible(P):
    """True iff P is non-empty (zero objective feasibility LP)."""
    out = _solve_raw(np.zeros(P.dim), P.C, P.d, "min")
    return out.is_optimal


def chebyshev_center(P):
    """Center and radius of the largest inscribed max-norm-independent ball.

    Uses the standard Euclidean-row-norm formulation; radius > 0 iff P has
    non-empty interior.  Raises SolverFailure for unbounded P (state sets are
    compact throughout).
    """
    n = P.dim
    norms = np.linalg.norm(P.C, axis=1)
    A = np.hstack([P.C, norms[:, None]])
    c = np.zeros(n + 1)
    c[-1] = 1.0
    out = _solve_raw(c, A, P.d, "max")
    if out.status == "unbounded":
        raise SolverFailure("chebyshev_center: polytope is unbounded")
    if out.status == "infeasible":
        return None, -np.inf
    return out.point[:n], float(out.value)


def bbox(P):
    """Exact coordinate-aligned bounding box of P via 2n LPs."""
    n = P.dim
    lo = np.empty(n)
    hi = np.empty(n)
    e = np.zeros(n)
    for i in range(n):
        e[i] = 1.0
        mn = solve_lp(e, P, "min")
        if mn.status == "infeasible":
            return Box.empty(n)
        if mn.status == "unbounded":
            raise SolverFailure("bbox: polytope is unbounded")
        mx = solve_lp(e, P, "max")
        if mx.status == "unbounded":
            raise SolverFailure("bbox: polytope is unbounded")
        lo[i] = mn.value
        hi[i] = mx.value
        e[i] = 0.0
    return Box(lo, hi)


def center_extent(P):
    """Bounding-box center, per-coordinate half-widths and overall extent."""
    b = bbox(P)
    if b.is_empty:
        raise ValueError("center_extent of an empty polytope")
    ext_i = 0.5 * b.width
    return b.center, ext_i, float(np.max(ext_i))


def intersect(P, Q):
    """Intersection by concatenating constraint rows."""
    return HPolytope(np.vstack([P.C, Q.C]), np.concatenate([P.d, Q.d]))


def remove_redundant(P, tol=TAU_FEAS):
    """Drop constraints whose removal does not change the feasible set.

    Each surviving row is tested with one LP maximizing its own normal over
    the remaining rows.  Trivial rows (zero normal, nonnegative offset) are
    dropped up front; a zero-normal row with negative offset marks the whole
    polytope infeasible and is preserved.
    """
    C, d = P.C, P.d
    norms = np.max(np.abs(C), axis=1)
    trivial = (norms <= tol) & (d >= -tol)
    if np.any((norms <= tol) & (d < -tol)):
        return HPolytope(np.zeros((1, P.dim)), np.array([-1.0]))
    C, d = C[~trivial], d[~trivial]
    if C.shape[0] == 0:
        return HPolytope(np.zeros((0, P.dim)), np.zeros(0))
    keep = np.ones(C.shape[0], dtype=bool)
    for i in range(C.shape[0]):
        mask = keep.copy()
        mask[i] = False
        if not np.any(mask):
            continue
        out = _solve_raw(C[i], C[mask], d[mask], "max")
        if out.is_optimal and out.value <= d[i] + tol:
            keep[i] = False
    return HPolytope(C[keep], d[keep])


def _fm_eliminate(C, d, col, tol=1e-11):
    """One Fourier-Motzkin elimination step for variable index col."""
    scale = np.maximum(np.max(np.abs(C), axis=1), 1.0)
    a = C[:, col]
    pos = a > tol * scale
    neg = a < -tol * scale
    zero = ~(pos | neg)
    rows = [C[zero]]
    offs = [d[zero]]
    for i in np.flatnonzero(pos):
        for j in np.flatnonzero(neg):
            # a_i > 0, a_j < 0: a_j * row_i - a_i * row_j cancels the column.
            w = (-C[j, col]) * C[i] + C[i, col] * C[j]
            rows.append(w[None, :])
            offs.append(np.array([(-C[j, col]) * d[i] + C[i, col] * d[j]]))
    C_new = np.vstack(rows) if rows else np.zeros((0, C.shape[1]))
    d_new = np.concatenate(offs) if offs else np.zeros(0)
    C_new = np.delete(C_new, col, axis=1)
    # Normalize to max-norm 1 rows to contain coefficient growth.
    nrm = np.max(np.abs(C_new), axis=1, initial=0.0)
    nz = nrm > 0
    C_new[nz] /= nrm[nz, None]
    d_new = np.where(nz, d_new / np.where(nz, nrm, 1.0), d_new)
    return C_new, d_new


def affine_image(P, M, c):
    """Exact H-representation of {M x + c : x in P}.

    Invertible M uses the closed-form pullback; singular M falls back to
    Fourier-Motzkin elimination of x from {C x <= d, y = M x + c}, with
    redundancy pruning interleaved after every eliminated variable.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    c = np.asarray(c, dtype=float).reshape(-1)
    n = P.dim
    if M.shape != (n, n) or c.size != n:
        raise ValueError("affine_image expects a square map matching P")
    m_norm = max(np.max(np.abs(M)), 1.0)
    if abs(np.linalg.det(M)) > TAU_SING * m_norm**n:
        Minv = np.linalg.inv(M)
        CM = P.C @ Minv
        return HPolytope(CM, P.d + CM @ c)
    # Variables (x, y); equality y = M x + c as paired inequalities.
    eq = np.hstack([-M, np.eye(n)])
    C_big = np.vstack(
        [
            np.hstack([P.C, np.zeros((P.n_rows, n))]),
            eq,
            -eq,
        ]
    )
    d_big = np.concatenate([P.d, c, -c])
    for _ in range(n):
        C_big, d_big = _fm_eliminate(C_big, d_big, 0)
        pruned = remove_redundant(HPolytope(C_big, d_big))
        C_big, d_big = pruned.C, pruned.d
    return HPolytope(C_big, d_big)


def interval_matvec(B, U):
    """Exact bounding box of {B u : u in U} for a box U (sign-split arithmetic)."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    center = B @ U.center
    radius = np.abs(B) @ (0.5 * U.width)
    return Box(center - radius, center + radius)


def vertices_2d(P, tol=1e-7):
    """Vertices of a bounded 2-D polytope by pairwise row intersection.

    Used by the plotting path and by test oracles; V-representations are not
    first-class anywhere else.
    """
    if P.dim != 2:
        raise ValueError("vertices_2d requires a planar polytope")
    pts = []
    for i, j in itertools.combinations(range(P.n_rows), 2):
        A = P.C[[i, j]]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        v = np.linalg.solve(A, P.d[[i, j]])
        if np.all(P.C @ v <= P.d + tol):
            pts.append(v)
    if not pts:
        return np.zeros((0, 2))
    pts = np.asarray(pts)
    # Dedup and order counterclockwise around the centroid.
    keep = []
    for v in pts:
        if not any(np.max(np.abs(v - u)) < 1e-8 for u in keep):
            keep.append(v)
    pts = np.asarray(keep)
    ctr = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - ctr[1], pts[:, 0] - ctr[0])
    return pts[np.argsort(ang)]


def dumps_json(obj):
    """Canonical JSON serialization (sorted keys, full-precision floats)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
