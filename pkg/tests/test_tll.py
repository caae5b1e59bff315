import json

import numpy as np
import pytest

from tllreach.tll import (
    LTISystem,
    ScalarTLL,
    TLLController,
    ValidationError,
    controller_from_json,
    controller_to_json,
    eval_scalar,
    eval_scalar_many,
    evaluate_many,
    lipschitz_bound,
    load_problem,
    random_problem,
    save_problem,
)

import oracles


def small_tll():
    W = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    b = np.array([0.0, 0.5, 1.0])
    return ScalarTLL(W, b, ((0, 1), (2,)))


def test_eval_matches_bruteforce():
    rng = np.random.default_rng(23)
    for _ in range(10):
        ctrl, _, _ = random_problem(3, 2, 5, 4, int(rng.integers(1 << 30)))
        X = rng.uniform(-3, 3, size=(50, 3))
        for comp in ctrl.components:
            ref = oracles.bf_eval_many(comp.W, comp.b, comp.selectors, X)
            assert np.allclose(eval_scalar_many(comp, X), ref, atol=1e-12)
            assert eval_scalar(comp, X[0]) == pytest.approx(ref[0], abs=1e-12)
        outs = evaluate_many(ctrl, X)
        assert outs.shape == (50, 2)


def test_validation_errors():
    with pytest.raises(ValidationError):
        ScalarTLL(np.ones((2, 2)), np.ones(3), ((0,),))  # size mismatch
    with pytest.raises(ValidationError):
        ScalarTLL(np.eye(2), np.zeros(2), ())  # no groups
    with pytest.raises(ValidationError):
        ScalarTLL(np.eye(2), np.zeros(2), ((0, 5),))  # index out of range
    with pytest.raises(ValidationError):
        ScalarTLL(np.ones((2, 2)), np.zeros(2), ((0,),))  # duplicate rows
    with pytest.raises(ValidationError):
        TLLController((small_tll(), ScalarTLL(np.eye(2), np.zeros(2), ((0,),))))
    with pytest.raises(ValidationError):
        LTISystem(np.ones((2, 3)), np.ones((2, 1)))


def test_selectors_are_sorted_deduplicated_zero_based():
    t = ScalarTLL(np.eye(2), np.zeros(2), ((1, 0, 1),))
    assert t.selectors == ((0, 1),)


def test_json_round_trip_uses_one_based_selectors():
    ctrl = TLLController((small_tll(),))
    obj = controller_to_json(ctrl)
    assert obj["components"][0]["selectors"] == [[1, 2], [3]]
    back = controller_from_json(obj)
    assert back.components[0].selectors == ((0, 1), (2,))
    assert np.array_equal(back.components[0].W, ctrl.components[0].W)


def test_controller_from_json_reports_bad_component():
    obj = controller_to_json(TLLController((small_tll(),)))
    obj["components"][0]["selectors"] = [[1, 9], [3]]
    with pytest.raises(ValidationError, match="component 0"):
        controller_from_json(obj)


def test_problem_round_trip(tmp_path):
    ctrl, sysm, X0 = random_problem(2, 1, 4, 4, 0)
    path = tmp_path / "p.json"
    save_problem(ctrl, sysm, X0, 0.05, 4, str(path))
    c2, s2, X2, eps, T = load_problem(str(path))
    assert eps == 0.05 and T == 4
    assert np.allclose(s2.A, sysm.A) and np.allclose(s2.B, sysm.B)
    assert np.allclose(X2.C, X0.C) and np.allclose(X2.d, X0.d)
    x = np.array([0.1, -0.2])
    assert eval_scalar(c2.components[0], x) == pytest.approx(
        eval_scalar(ctrl.components[0], x)
    )


def test_load_problem_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{\n  broken\n")
    with pytest.raises(ValidationError, match="line 2"):
        load_problem(str(path))


def test_lipschitz_bound_is_max_row_one_norm():
    ctrl = TLLController((small_tll(),))
    assert lipschitz_bound(ctrl) == pytest.approx(2.0)  # row (-1, -1)


def test_random_problem_is_seed_deterministic():
    a = random_problem(2, 1, 6, 6, 42)
    b = random_problem(2, 1, 6, 6, 42)
    assert np.array_equal(a[1].A, b[1].A)
    assert np.array_equal(a[0].components[0].W, b[0].components[0].W)
    assert a[0].components[0].selectors == b[0].components[0].selectors
    c = random_problem(2, 1, 6, 6, 43)
    assert not np.array_equal(a[1].A, c[1].A)
    # A is scaled to a max absolute row sum of 0.9.
    assert np.max(np.abs(a[1].A).sum(axis=1)) == pytest.approx(0.9)
