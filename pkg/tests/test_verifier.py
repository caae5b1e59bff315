import numpy as np
import pytest

from tllreach.polytope import Box, HPolytope
from tllreach.tll import ScalarTLL, TLLController, eval_scalar, random_problem
from tllreach.verifier import (
    output_box,
    output_max,
    output_min,
    verify_lower_bound,
)

import oracles


def make_pair(seed, N):
    rng = np.random.default_rng(seed)
    ctrl, _, _ = random_problem(2, 1, N, N, seed)
    C, d = oracles.random_polytope_2d(rng, cuts=1)
    return ctrl.components[0], HPolytope(C, d)


def test_output_max_matches_oracle():
    for seed, N in [(1, 3), (2, 4), (3, 5)]:
        tll, P = make_pair(seed, N)
        _, mx = oracles.exact_minmax(tll.W, tll.b, tll.selectors, P.C, P.d)
        assert output_max(tll, P) == pytest.approx(mx, abs=1e-6)


def test_output_min_brackets_the_true_minimum():
    tol = 1e-4
    for seed, N in [(4, 3), (5, 4), (6, 5)]:
        tll, P = make_pair(seed, N)
        mn, _ = oracles.exact_minmax(tll.W, tll.b, tll.selectors, P.C, P.d)
        lo = output_min(tll, P, tol)
        assert lo <= mn + 1e-7
        assert mn <= lo + tol + 1e-7


def test_verify_lower_bound_witness_is_genuine():
    tll, P = make_pair(7, 4)
    mn, _ = oracles.exact_minmax(tll.W, tll.b, tll.selectors, P.C, P.d)
    ok, wit = verify_lower_bound(tll, P, mn + 0.05)
    assert not ok
    assert P.contains([wit])[0]
    assert eval_scalar(tll, wit) < mn + 0.05
    ok, wit = verify_lower_bound(tll, P, mn - 0.05)
    assert ok and wit is None


def test_verify_lower_bound_with_prebounds_prefilter():
    tll, P = make_pair(8, 5)
    lo, hi = oracles.poly_bbox(P.C, P.d)
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    mid = tll.W @ c + tll.b
    rad = np.abs(tll.W) @ r
    pre = np.stack([mid - rad, mid + rad], axis=1)
    mn, _ = oracles.exact_minmax(tll.W, tll.b, tll.selectors, P.C, P.d)
    for a in (mn - 0.1, mn + 0.1):
        plain, _ = verify_lower_bound(tll, P, a)
        fast, _ = verify_lower_bound(tll, P, a, prebounds=pre)
        assert plain == fast == (mn >= a)


def test_constant_function_handling():
    # A zero-weight row contributes a fixed sign instead of a hyperplane.
    W = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = np.array([0.5, 0.0])
    tll = ScalarTLL(W, b, ((0,), (1,)))
    P = HPolytope.from_box(Box(-np.ones(2), np.ones(2)))
    assert verify_lower_bound(tll, P, 0.4)[0]
    assert not verify_lower_bound(tll, P, 0.6)[0]


def test_output_box_orders_and_covers_samples():
    rng = np.random.default_rng(9)
    ctrl, _, _ = random_problem(2, 2, 4, 4, 21)
    C, d = oracles.random_polytope_2d(rng, cuts=0)
    P = HPolytope(C, d)
    ob = output_box(ctrl, P, 1e-3)
    assert np.all(ob.lo <= ob.hi)
    pts = oracles.sample_poly(rng, C, d, 500)
    for k, comp in enumerate(ctrl.components):
        vals = oracles.bf_eval_many(comp.W, comp.b, comp.selectors, pts)
        assert vals.min() >= ob.lo[k] - 1e-9
        assert vals.max() <= ob.hi[k] + 1e-9


def test_output_min_rejects_bad_arguments():
    tll, P = make_pair(10, 3)
    with pytest.raises(ValueError):
        output_min(tll, P, 0.0)
    empty = HPolytope(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([0.0, -1.0]))
    with pytest.raises(ValueError):
        output_min(tll, empty, 1e-3)
