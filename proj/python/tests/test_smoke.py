import math
from pathlib import Path

import numpy as np
import pytest

import graspforge as gf

TOY_HAND = Path(__file__).resolve().parents[2] / "tests" / "data" / "toy_hand" / "toy_hand.urdf"


@pytest.fixture(scope="module")
def hand():
    return gf.Hand(str(TOY_HAND), points=256, seed=7)


@pytest.fixture(scope="module")
def box():
    return gf.make_box([-0.03, 0.011, 0.009], [0.03, 0.036, 0.081])


def test_mesh_and_sdf(box):
    assert box.watertight
    assert box.volume() == pytest.approx(0.06 * 0.025 * 0.072)
    d = gf.signed_distance(box, np.array([[0.0, 0.02, 0.05], [0.0, 0.02, 0.2]]))
    assert d == pytest.approx([-0.009, 0.119])


def test_icp_recovers_a_shift():
    v = np.array([[0, 0, 0], [0.08, 0, 0], [0, 0.05, 0], [0, 0, 0.03]], dtype=float)
    f = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]], dtype=np.int32)
    tet = gf.TriMesh(v, f)
    assert tet.watertight
    pts = gf.sample_surface(tet, 800, seed=1) + np.array([0.004, -0.002, 0.001])
    r = gf.icp(pts, tet, max_iters=400)
    assert r["translation"] == pytest.approx([-0.004, 0.002, -0.001], abs=1e-5)
    aligned = pts @ r["rotation"].T * r["scale"] + r["translation"]
    assert np.abs(gf.signed_distance(tet, aligned)).max() < 1e-5


def test_d2_self_distance_is_zero(box):
    pts = gf.sample_surface(box, 500, seed=2)
    h = gf.d2_histogram(pts, 0.12, pairs=5000, seed=3)
    assert sum(h) == pytest.approx(1.0)
    assert gf.wasserstein_1d(h, h, 0.12) == 0.0


def test_multilateration():
    anchors = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float)
    target = np.array([0.3, -0.2, 0.5])
    p, res = gf.multilaterate(anchors, list(np.linalg.norm(anchors - target, axis=1)))
    assert p == pytest.approx(target, abs=1e-9)
    assert res < 1e-9


def test_single_contact_has_no_closure():
    eps = gf.force_closure_epsilon(np.array([[0.0, 0.0, 0.0]]), np.array([[0.0, 0.0, 1.0]]))
    assert eps == 0.0


def test_encode_decode_round_trip(hand, box):
    obj = gf.sample_surface(box, 300, seed=4)
    rng = np.random.default_rng(0)
    lim = hand.limits
    angles = lim[:, 0] + rng.random(hand.dof) * (lim[:, 1] - lim[:, 0])
    d = hand.encode(angles, obj, translation=[0.01, 0.0, -0.02])
    assert d.shape == (hand.point_count, 300)
    out = hand.decode(d, obj)
    assert out["infeasible_rows"] == 0
    assert np.abs(out["angles"] - angles).max() < 1e-3
    assert out["translation"] == pytest.approx([0.01, 0.0, -0.02], abs=1e-4)


def test_grasp_evaluation(hand, box):
    closed = np.full(hand.dof, math.pi / 2)
    v = hand.evaluate(closed, box)
    assert v["success"]
    assert v["epsilon"] > 0.05
    assert v["penetration_depth"] == 0.0
    far = hand.evaluate(closed, box, translation=[1.0, 0.0, 0.0])
    assert not far["success"]
    assert far["contacts"] == 0


def test_retarget_stays_within_limits(hand):
    kp = [[0.0, 0.0, 0.0]]
    for finger in range(5):
        for k in range(1, 5):
            kp.append([-0.03 + 0.015 * finger, 0.01 * k * (finger == 0), 0.03 + 0.02 * k])
    r = hand.retarget(np.array(kp))
    lim = hand.limits
    assert math.isfinite(r["residual"])
    assert np.all(r["angles"] >= lim[:, 0] - 1e-12)
    assert np.all(r["angles"] <= lim[:, 1] + 1e-12)
    with pytest.raises(ValueError):
        hand.retarget(np.zeros((20, 3)))


def test_errors_are_value_errors(hand):
    with pytest.raises(ValueError):
        hand.points(np.zeros(hand.dof + 1))
    with pytest.raises(ValueError):
        gf.load_mesh("/nonexistent.obj")
