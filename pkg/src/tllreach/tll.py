"""Two-level lattice controllers and LTI systems: semantics, I/O, generation.

A scalar two-level lattice network computes max over selector groups of the
min over each group of affine "local linear functions" w_i . x + b_i.  A
multi-output controller stacks m equally-sized scalar networks.

Function and group indices are 0-based throughout the Python API; the JSON
file format uses 1-based selector indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from tllreach.polytope import HPolytope


class ValidationError(ValueError):
    """A model file or constructor argument violates a structural invariant."""


@dataclass(frozen=True)
class ScalarTLL:
    """One scalar lattice network: W (N, n), b (N,), selector index groups."""

    W: np.ndarray
    b: np.ndarray
    selectors: tuple

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if W.shape[0] != b.size:
            raise ValidationError("W and b row counts disagree")
        if W.shape[0] < 1 or W.shape[1] < 1:
            raise ValidationError("need N >= 1 local functions in n >= 1 dims")
        sels = tuple(tuple(sorted(set(int(i) for i in s))) for s in self.selectors)
        if len(sels) < 1:
            raise ValidationError("need M >= 1 selector groups")
        for s in sels:
            if len(s) == 0:
                raise ValidationError("selector groups must be non-empty")
            if s[0] < 0 or s[-1] >= W.shape[0]:
                raise ValidationError(f"selector index out of range in group {s}")
        rows = {(*wi, bi) for wi, bi in zip(map(tuple, W), b)}
        if len(rows) != W.shape[0]:
            raise ValidationError("local linear functions must be pairwise distinct")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "selectors", sels)

    @property
    def n(self):
        return self.W.shape[1]

    @property
    def N(self):
        return self.W.shape[0]

    @property
    def M(self):
        return len(self.selectors)


@dataclass(frozen=True)
class TLLController:
    """Multi-output controller: m scalar networks sharing n, N and M."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 1:
            raise ValidationError("need at least one output component")
        ref = comps[0]
        for k, c in enumerate(comps):
            if (c.n, c.N, c.M) != (ref.n, ref.N, ref.M):
                raise ValidationError(f"component {k} sizes differ from component 0")
        object.__setattr__(self, "components", comps)

    @property
    def n(self):
        return self.components[0].n

    @property
    def m(self):
        return len(self.components)

    @property
    def N(self):
        return self.components[0].N

    @property
    def M(self):
        return self.components[0].M


@dataclass(frozen=True)
class LTISystem:
    """Discrete-time dynamics x_{t+1} = A x_t + B u_t."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValidationError("A must be square")
        if B.shape[0] != A.shape[0]:
            raise ValidationError("B row count must match A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]


def eval_scalar(tll, x):
    """max over groups of the min over each group of w_i . x + b_i."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != tll.n:
        raise ValueError(f"input dimension {x.size}, expected {tll.n}")
    vals = tll.W @ x + tll.b
    return float(max(min(vals[i] for i in s) for s in tll.selectors))


def eval_scalar_many(tll, X):
    """Vectorized eval_scalar over points X (k, n) -> (k,)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != tll.n:
        raise ValueError(f"input dimension {X.shape[1]}, expected {tll.n}")
    vals = X @ tll.W.T + tll.b
    group_mins = np.stack([vals[:, s].min(axis=1) for s in tll.selectors], axis=1)
    return group_mins.max(axis=1)


def evaluate(ctrl, x):
    """Controller output at a single point, component-wise."""
    return np.array([eval_scalar(c, x) for c in ctrl.components])


def evaluate_many(ctrl, X):
    """Controller outputs for points X (k, n) -> (k, m)."""
    return np.stack([eval_scalar_many(c, X) for c in ctrl.components], axis=1)


def lipschitz_bound(ctrl):
    """Max-norm Lipschitz constant bound: max over outputs and rows of |w_i|_1.

    Tight whenever every local linear function is realized on an open set.
    """
    return float(max(np.max(np.abs(c.W).sum(axis=1)) for c in ctrl.components))


def scalar_lipschitz_bound(tll):
    return float(np.max(np.abs(tll.W).sum(axis=1)))


# ---------------------------------------------------------------------------
# Serialization.  Selector indices are 1-based on disk, 0-based in memory.
# ---------------------------------------------------------------------------


def controller_to_json(ctrl):
    return {
        "n": ctrl.n,
        "m": ctrl.m,
        "N": ctrl.N,
        "M": ctrl.M,
        "components": [
            {
                "W": c.W.tolist(),
                "b": c.b.tolist(),
                "selectors": [[i + 1 for i in s] for s in c.selectors],
            }
            for c in ctrl.components
        ],
    }


def controller_from_json(obj):
    try:
        n, m, N, M = int(obj["n"]), int(obj["m"]), int(obj["N"]), int(obj["M"])
        raw = obj["components"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed controller object: {exc}") from exc
    if len(raw) != m:
        raise ValidationError(f"expected {m} components, found {len(raw)}")
    comps = []
    for k, c in enumerate(raw):
        try:
            W = np.asarray(c["W"], dtype=float)
            b = np.asarray(c["b"], dtype=float)
            sels = [[int(i) - 1 for i in s] for s in c["selectors"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed component {k}: {exc}") from exc
        try:
            comp = ScalarTLL(W, b, tuple(map(tuple, sels)))
        except ValidationError as exc:
            raise ValidationError(f"component {k}: {exc}") from exc
        if (comp.n, comp.N, comp.M) != (n, N, M):
            raise ValidationError(
                f"component {k} has size (n={comp.n}, N={comp.N}, M={comp.M}), "
                f"header declares (n={n}, N={N}, M={M})"
            )
        comps.append(comp)
    return TLLController(tuple(comps))


def save_controller(ctrl, path):
    with open(path, "w") as fh:
        json.dump(controller_to_json(ctrl), fh)


def load_controller(path):
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return controller_from_json(obj)


def problem_to_json(ctrl, sys, X0, epsilon, T):
    return {
        "controller": controller_to_json(ctrl),
        "A": sys.A.tolist(),
        "B": sys.B.tolist(),
        "X0": X0.to_json(),
        "epsilon": float(epsilon),
        "T": int(T),
    }


def problem_from_json(obj, base_dir="."):
    import os

    raw_ctrl = obj.get("controller")
    if isinstance(raw_ctrl, str):
        ctrl = load_controller(os.path.join(base_dir, raw_ctrl))
    else:
        ctrl = controller_from_json(raw_ctrl)
    sys = LTISystem(np.asarray(obj["A"], dtype=float), np.asarray(obj["B"], dtype=float))
    if sys.n != ctrl.n or sys.m != ctrl.m:
        raise ValidationError(
            f"system dimensions (n={sys.n}, m={sys.m}) do not match "
            f"controller (n={ctrl.n}, m={ctrl.m})"
        )
    X0 = HPolytope.from_json(obj["X0"])
    if X0.dim != sys.n:
        raise ValidationError(f"X0 lives in dimension {X0.dim}, system in {sys.n}")
    return ctrl, sys, X0, float(obj.get("epsilon", 0.1)), int(obj.get("T", 1))


def save_problem(ctrl, sys, X0, epsilon, T, path):
    with open(path, "w") as fh:
        json.dump(problem_to_json(ctrl, sys, X0, epsilon, T), fh)


def load_problem(path):
    import os

    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return problem_from_json(obj, base_dir=os.path.dirname(path) or ".")


# ---------------------------------------------------------------------------
# Random instance generation.
# ---------------------------------------------------------------------------


def _random_scalar_tll(rng, n, N, M):
    while True:
        W = rng.uniform(-1.0, 1.0, size=(N, n))
        b = rng.uniform(-1.0, 1.0, size=N)
        if len({(*wi, bi) for wi, bi in zip(map(tuple, W), b)}) == N:
            break
    sels = []
    for _ in range(M):
        size = int(rng.integers(1, N + 1))
        sels.append(tuple(sorted(rng.choice(N, size=size, replace=False).tolist())))
    return ScalarTLL(W, b, tuple(sels))


def _random_rotation(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q *= np.sign(np.diag(r))
    return q


def random_problem(n, m, N, M, seed):
    """Seeded random (controller, system, initial polytope) triple.

    Weights uniform on [-1, 1]; A scaled to max absolute row sum 0.9; X_0 a
    randomly rotated unit-half-width box around a random center in [-2, 2]^n.
    """
    if min(n, m, N, M) < 1:
        raise ValueError("all sizes must be >= 1")
    rng = np.random.default_rng(seed)
    ctrl = TLLController(tuple(_random_scalar_tll(rng, n, N, M) for _ in range(m)))
    A = rng.uniform(-1.0, 1.0, size=(n, n))
    A *= 0.9 / np.max(np.abs(A).sum(axis=1))
    B = rng.uniform(-1.0, 1.0, size=(n, m))
    sys = LTISystem(A, B)
    R = _random_rotation(rng, n)
    c = rng.uniform(-2.0, 2.0, size=n)
    C = np.vstack([R.T, -R.T])
    d = np.concatenate([1.0 + R.T @ c, 1.0 - R.T @ c])
    return ctrl, sys, HPolytope(C, d)
