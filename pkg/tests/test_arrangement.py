import numpy as np
import pytest

from tllreach.arrangement import (
    Cell,
    Hyperplane,
    active_function,
    enumerate_cells,
    enumerate_cells_merged,
    normalize_hyperplanes,
)
from tllreach.polytope import Box, HPolytope
from tllreach.tll import ScalarTLL, TLLController

import oracles


def square(r=2.0):
    return HPolytope.from_box(Box(np.full(2, -r), np.full(2, r)))


def test_hyperplane_rejects_zero_normal():
    with pytest.raises(ValueError):
        Hyperplane(np.zeros(2), 1.0)


def test_normalize_merges_scaled_duplicates():
    hps = [
        Hyperplane(np.array([2.0, 0.0]), 2.0),
        Hyperplane(np.array([-1.0, 0.0]), -1.0),
        Hyperplane(np.array([0.0, 1.0]), 0.0),
    ]
    merged, mapping = normalize_hyperplanes(hps)
    assert len(merged) == 2
    assert mapping[0] == (0, 1)
    assert mapping[1] == (0, -1)
    assert mapping[2] == (1, 1)


def test_no_hyperplanes_single_cell():
    cells = enumerate_cells([], square())
    assert len(cells) == 1
    assert cells[0].signs == ()


def test_single_line_two_cells_with_margins():
    cells = enumerate_cells([Hyperplane(np.array([1.0, 0.0]), 0.0)], square())
    assert sorted(c.signs for c in cells) == [(-1,), (1,)]
    for c in cells:
        assert c.region.contains([c.witness])[0]
        s = c.signs[0]
        assert s * c.witness[0] >= 1e-8


def test_counts_match_bruteforce_oracle():
    rng = np.random.default_rng(31)
    dom = square()
    for K in (2, 3, 5):
        ang = rng.uniform(0, np.pi, size=K)
        W = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        b = rng.uniform(-1.0, 1.0, size=K)
        cells, _, mapping = enumerate_cells_merged(
            [Hyperplane(W[i], b[i]) for i in range(K)], dom
        )
        got = sorted(
            tuple(int(mapping[i][1] * c.signs[mapping[i][0]]) for i in range(K))
            for c in cells
        )
        ref = oracles.cells_bruteforce(W, b, dom.C, dom.d)
        assert got == sorted(s for s, _ in ref)


def test_empty_domain_yields_no_cells():
    empty = HPolytope(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([0.0, -1.0]))
    assert enumerate_cells([Hyperplane(np.array([0.0, 1.0]), 0.0)], empty) == []


def test_merged_mapping_recovers_original_signs():
    hps = [
        Hyperplane(np.array([1.0, 1.0]), 0.0),
        Hyperplane(np.array([-2.0, -2.0]), 0.0),
    ]
    cells, merged, mapping = enumerate_cells_merged(hps, square())
    assert len(merged) == 1 and len(cells) == 2
    for cell in cells:
        for i, h in enumerate(hps):
            k, orient = mapping[i]
            sign = orient * cell.signs[k]
            assert sign * (h.w @ cell.witness - h.b) > 0


def test_active_function_ties_to_lowest_index():
    W = np.array([[1.0, 0.0], [1.0, 0.0001], [0.0, 1.0]])
    b = np.zeros(3)
    ctrl = TLLController((ScalarTLL(W, b, ((0, 1), (2,))),))
    # At the origin all three functions tie; group mins tie across groups too.
    assert active_function(ctrl, np.zeros(2)) == (0,)


def test_active_function_matches_bruteforce():
    rng = np.random.default_rng(37)
    ctrl = TLLController((ScalarTLL(rng.normal(size=(5, 2)), rng.normal(size=5),
                                    ((0, 1), (2, 3), (4,))),))
    comp = ctrl.components[0]
    for _ in range(100):
        x = rng.uniform(-2, 2, size=2)
        assert active_function(ctrl, x) == (oracles.bf_active(comp.W, comp.b, comp.selectors, x),)
