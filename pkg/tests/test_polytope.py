import numpy as np
import pytest
from scipy.optimize import linprog

from tllreach.polytope import (
    Box,
    HPolytope,
    SolverFailure,
    affine_image,
    bbox,
    chebyshev_center,
    center_extent,
    interval_matvec,
    intersect,
    is_feasible,
    remove_redundant,
    solve_lp,
    vertices_2d,
)

import oracles


def unit_box(n):
    return HPolytope.from_box(Box(-np.ones(n), np.ones(n)))


def test_box_basics():
    b = Box([0.0, -1.0], [2.0, 1.0])
    assert np.allclose(b.center, [1.0, 0.0])
    assert np.allclose(b.width, [2.0, 2.0])
    assert not b.is_empty
    assert Box.empty(2).is_empty
    m = Box.empty(2).merge(b)
    assert np.allclose(m.lo, b.lo) and np.allclose(m.hi, b.hi)
    s = b.add(Box([1.0, 1.0], [1.0, 2.0]))
    assert np.allclose(s.lo, [1.0, 0.0]) and np.allclose(s.hi, [3.0, 3.0])
    assert b.contains([[1.0, 0.0], [3.0, 0.0]]).tolist() == [True, False]


def test_solve_lp_matches_scipy_on_random_problems():
    rng = np.random.default_rng(7)
    for _ in range(300):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(n + 1, 20))
        C = rng.normal(size=(m, n))
        d = rng.normal(size=m) + 1.0
        c = rng.normal(size=n)
        P = HPolytope(C, d)
        out = solve_lp(c, P, "min")
        res = linprog(c, A_ub=C, b_ub=d, bounds=(None, None), method="highs")
        if res.status == 0:
            assert out.is_optimal
            assert out.value == pytest.approx(res.fun, abs=1e-6)
            assert np.all(C @ out.point <= d + 1e-7)
        elif res.status == 2:
            assert out.status == "infeasible"
        elif res.status == 3:
            assert out.status == "unbounded"


def test_solve_lp_infeasible_and_unbounded():
    P = HPolytope(np.array([[1.0], [-1.0]]), np.array([0.0, -1.0]))  # x<=0, x>=1
    assert solve_lp(np.array([1.0]), P).status == "infeasible"
    assert not is_feasible(P)
    half = HPolytope(np.array([[1.0, 0.0]]), np.array([1.0]))
    assert solve_lp(np.array([0.0, 1.0]), half, "max").status == "unbounded"


def test_chebyshev_center_is_deep_inside():
    rng = np.random.default_rng(3)
    for k in range(20):
        C, d = oracles.random_polytope_2d(rng)
        c, r = chebyshev_center(HPolytope(C, d))
        assert r > 0.0
        margins = d - C @ c
        assert np.min(margins / np.linalg.norm(C, axis=1)) >= r - 1e-7


def test_bbox_matches_oracle():
    rng = np.random.default_rng(11)
    for k in range(20):
        C, d = oracles.random_polytope_2d(rng)
        b = bbox(HPolytope(C, d))
        lo, hi = oracles.poly_bbox(C, d)
        assert np.allclose(b.lo, lo, atol=1e-7)
        assert np.allclose(b.hi, hi, atol=1e-7)
    center, ext_i, ext = center_extent(HPolytope(C, d))
    assert ext == pytest.approx(np.max(ext_i))


def test_bbox_of_empty_polytope_is_empty():
    P = HPolytope(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([0.0, -1.0]))
    assert bbox(P).is_empty


def test_affine_image_invertible():
    rng = np.random.default_rng(5)
    P = unit_box(2)
    M = np.array([[1.0, 0.5], [-0.25, 2.0]])
    c = np.array([0.3, -0.7])
    img = affine_image(P, M, c)
    pts = rng.uniform(-1.0, 1.0, size=(500, 2))
    assert np.all(img.contains(pts @ M.T + c))
    outside = np.array([M @ np.array([1.5, 0.0]) + c])
    assert not img.contains(outside)[0]


def test_affine_image_singular_projects():
    # Rank-1 map: the image is a segment; sampled images stay inside and the
    # image bbox matches the 1-D range.
    P = unit_box(2)
    M = np.array([[1.0, 1.0], [0.0, 0.0]])
    c = np.zeros(2)
    img = affine_image(P, M, c)
    rng = np.random.default_rng(9)
    pts = rng.uniform(-1.0, 1.0, size=(300, 2))
    assert np.all(img.contains(pts @ M.T))
    b = bbox(img)
    assert b.lo[0] == pytest.approx(-2.0, abs=1e-6)
    assert b.hi[0] == pytest.approx(2.0, abs=1e-6)
    assert abs(b.lo[1]) < 1e-7 and abs(b.hi[1]) < 1e-7


def test_remove_redundant_preserves_the_set():
    P = HPolytope(
        np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [1.0, 1.0]]),
        np.array([1.0, 1.0, 1.0, 1.0, 2.0, 5.0]),
    )
    R = remove_redundant(P)
    assert R.n_rows == 4
    rng = np.random.default_rng(13)
    pts = rng.uniform(-2.0, 2.0, size=(1000, 2))
    assert np.array_equal(P.contains(pts), R.contains(pts))


def test_interval_matvec_matches_corner_enumeration():
    rng = np.random.default_rng(17)
    for _ in range(20):
        B = rng.normal(size=(3, 2))
        U = Box(rng.uniform(-2, 0, size=2), rng.uniform(0, 2, size=2))
        out = interval_matvec(B, U)
        corners = np.array([[U.lo[0], U.lo[1]], [U.lo[0], U.hi[1]],
                            [U.hi[0], U.lo[1]], [U.hi[0], U.hi[1]]])
        imgs = corners @ B.T
        assert np.allclose(out.lo, imgs.min(axis=0), atol=1e-12)
        assert np.allclose(out.hi, imgs.max(axis=0), atol=1e-12)


def test_vertices_2d_of_box():
    v = vertices_2d(unit_box(2))
    assert v.shape == (4, 2)
    assert sorted(map(tuple, np.round(v))) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]


def test_intersect_concatenates():
    P = intersect(unit_box(2), HPolytope(np.array([[1.0, 0.0]]), np.array([0.0])))
    assert P.n_rows == 5
    assert P.contains([[-0.5, 0.0]])[0]
    assert not P.contains([[0.5, 0.0]])[0]


def test_json_round_trip():
    P = unit_box(3)
    Q = HPolytope.from_json(P.to_json())
    assert np.array_equal(P.C, Q.C) and np.array_equal(P.d, Q.d)
