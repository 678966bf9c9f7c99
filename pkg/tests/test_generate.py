from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone

from scanpathkit import (
    DecayKind,
    RolloutConfig,
    SaliencyMap,
    ScanpathPredictor,
    ValidationError,
    apply_ior_mask,
    decay_weight,
    rollout,
)

LINEAR = DecayKind.BASELINE_LINEAR
GAMMA = DecayKind.EXPONENTIAL_GAMMA


def grid_positions(sp, width, height):
    return [(round(f.y * height - 0.5), round(f.x * width - 0.5)) for f in sp.fixations]


# ---------------------------------------------------------------------------
# decay_weight
# ---------------------------------------------------------------------------


def test_baseline_goes_negative_past_twelve():
    # thirteen fixations break the linear schedule: the oldest gets -0.1
    assert decay_weight(LINEAR, 0.1, 13, 1) == pytest.approx(-0.1, abs=1e-12)


def test_most_recent_fixation_always_fully_weighted():
    for gamma in (0.1, 0.5, 0.9):
        assert decay_weight(GAMMA, gamma, 13, 12) == 1.0
    assert decay_weight(LINEAR, 0.1, 7, 6) == 1.0


def test_gamma_decay_direct_value():
    assert decay_weight(GAMMA, 0.1, 13, 1) == pytest.approx(1e-11, rel=1e-9)


def test_gamma_weights_always_in_unit_interval():
    gammas = [round(0.01 * k, 2) for k in range(1, 100)]
    for gamma in gammas:
        for n in range(2, 51):
            for i in range(1, n):
                w = decay_weight(GAMMA, gamma, n, i)
                assert 0.0 < w <= 1.0


def test_decay_weight_domain_checked():
    with pytest.raises(ValidationError):
        decay_weight(GAMMA, 0.1, 5, 0)
    with pytest.raises(ValidationError):
        decay_weight(GAMMA, 0.1, 5, 5)
    with pytest.raises(ValidationError):
        decay_weight(GAMMA, 1.5, 5, 1)


# ---------------------------------------------------------------------------
# apply_ior_mask
# ---------------------------------------------------------------------------


def uniform_map(side=10, value=1.0):
    return SaliencyMap(np.full((side, side), value))


def test_full_weight_zeroes_disk_exactly():
    sal = uniform_map(10)
    # single history point: n=2, i=1 -> exponent 0 -> weight exactly 1
    cfg = RolloutConfig(n_fixations=2, decay=GAMMA, gamma=0.5, mask_radius_frac=0.3, image_side=10)
    out = apply_ior_mask(sal, [(5, 5)], cfg)
    rows, cols = np.mgrid[0:10, 0:10]
    inside = (rows - 5) ** 2 + (cols - 5) ** 2 <= 3.0**2
    assert np.all(out[inside] == 0.0)
    assert np.all(out[~inside] == 1.0)


def test_zero_weight_leaves_map_unchanged():
    sal = uniform_map(10)
    # old fixation under the linear schedule at n=12: weight 1-0.1*10 = 0.0
    cfg = RolloutConfig(n_fixations=12, decay=LINEAR, gamma=0.5, mask_radius_frac=0.3, image_side=10)
    history = [(5, 5)] + [(0, c) for c in range(10)]  # len 11 -> n=12, i=1 ages 10 steps
    out_first_only = apply_ior_mask(sal, [(5, 5)], cfg)
    assert out_first_only.min() == 0.0  # sanity: recent point does suppress
    # check the i=1 factor alone: build history of length 11 and inspect a cell
    # only inside the first disk
    out = apply_ior_mask(sal, history, cfg)
    # cell (7,5) is within radius 3 of (5,5) and far from row 0
    weight_first = decay_weight(LINEAR, 0.5, 12, 1)
    assert weight_first == pytest.approx(0.0, abs=1e-12)
    assert out[7, 5] == pytest.approx(1.0)


def test_negative_weights_clamp_to_no_suppression():
    sal = uniform_map(10)
    cfg = RolloutConfig(n_fixations=14, decay=LINEAR, gamma=0.5, mask_radius_frac=0.2, image_side=10)
    history = [(5, 5)] + [(0, c) for c in range(12)]  # n=14: i=1 weight = -0.1
    out = apply_ior_mask(sal, history, cfg)
    assert decay_weight(LINEAR, 0.5, 14, 1) < 0
    assert out[7, 5] == pytest.approx(1.0)  # clamped: no suppression, no amplification
    assert out.min() >= 0.0


def test_overlapping_disks_compose_multiplicatively():
    sal = uniform_map(10)
    cfg = RolloutConfig(n_fixations=3, decay=LINEAR, gamma=0.5, mask_radius_frac=0.35, image_side=10)
    # n=3: weights are 1-0.1*1 = 0.9 (i=1) and 1.0 (i=2)
    out = apply_ior_mask(sal, [(4, 4), (4, 6)], cfg)
    # cell (4,5) lies in both disks: value 1 * (1-0.9) * (1-1.0) = 0
    assert out[4, 5] == 0.0
    # cell inside only the first disk
    assert out[4, 1] == pytest.approx(0.1)
    # outside both disks
    assert out[9, 9] == pytest.approx(1.0)


def test_mask_monotone_in_radius():
    rng = np.random.default_rng(5)
    sal = SaliencyMap(rng.random((20, 20)) + 0.1)
    history = [(3, 3), (10, 15), (17, 5)]
    masses = []
    for frac in (0.05, 0.1, 0.2, 0.4, 0.8):
        cfg = RolloutConfig(
            n_fixations=4, decay=GAMMA, gamma=0.5, mask_radius_frac=frac, image_side=20
        )
        masses.append(apply_ior_mask(sal, history, cfg).sum())
    assert all(a >= b - 1e-12 for a, b in zip(masses, masses[1:]))


# ---------------------------------------------------------------------------
# rollout
# ---------------------------------------------------------------------------


def test_rollout_single_positive_cell():
    values = np.zeros((30, 40))
    values[10, 20] = 1.0
    sp = rollout(SaliencyMap(values), RolloutConfig(n_fixations=1, image_side=40))
    assert len(sp) == 1
    assert sp.fixations[0].x == pytest.approx((20 + 0.5) / 40)
    assert sp.fixations[0].y == pytest.approx((10 + 0.5) / 30)


def test_rollout_greedy_with_masking_order():
    # 3-cell row [5, 3, 4]: pick 0, then 2, then 1 once 0 and 2 are suppressed
    sal = SaliencyMap(np.array([[5.0, 3.0, 4.0]]))
    cfg = RolloutConfig(
        n_fixations=3, decay=GAMMA, gamma=0.999999, mask_radius_frac=0.25, image_side=3
    )
    cols = [pos[1] for pos in grid_positions(rollout(sal, cfg), 3, 1)]
    assert cols == [0, 2, 1]


def test_rollout_deterministic_bit_for_bit():
    rng = np.random.default_rng(42)
    sal = SaliencyMap(rng.random((64, 64)))
    cfg = RolloutConfig(n_fixations=8, image_side=64)
    a = rollout(sal, cfg)
    b = rollout(sal, cfg)
    assert [(f.x, f.y) for f in a.fixations] == [(f.x, f.y) for f in b.fixations]


def test_rollout_tie_break_row_then_column():
    sal = uniform_map(5)
    cfg = RolloutConfig(n_fixations=1, mask_radius_frac=0.2, image_side=5)
    sp = rollout(sal, cfg)
    assert grid_positions(sp, 5, 5) == [(0, 0)]


def test_rollout_separation_under_full_suppression():
    rng = np.random.default_rng(9)
    sal = SaliencyMap(1.0 + 0.01 * rng.random((225, 225)))
    cfg = RolloutConfig(n_fixations=10, decay=GAMMA, gamma=0.99, mask_radius_frac=0.1)
    pts = np.array([(f.x * 225, f.y * 225) for f in rollout(sal, cfg).fixations])
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            assert np.linalg.norm(pts[i] - pts[j]) > 22.5


def test_rollout_whole_map_masked_falls_back():
    # the newest pick's disk covers the entire grid, so suppression zeroes
    # everything and the fallback must keep supplying fresh cells
    sal = uniform_map(50)
    cfg = RolloutConfig(n_fixations=5, mask_radius_frac=0.9, image_side=100)
    sp = rollout(sal, cfg)
    positions = grid_positions(sp, 50, 50)
    assert len(sp) == 5
    assert positions[0] == (0, 0)
    assert len(set(positions)) == 5  # fallback never re-picks an exact history cell


def test_rollout_radius_09_uniform_completes():
    sal = uniform_map(225)
    cfg = RolloutConfig(n_fixations=10, mask_radius_frac=0.9)
    first = rollout(sal, cfg)
    second = rollout(sal, cfg)
    assert len(first) == 10
    assert [(f.x, f.y) for f in first.fixations] == [(f.x, f.y) for f in second.fixations]


def test_rollout_rejects_all_zero_map():
    with pytest.raises(ValidationError):
        SaliencyMap(np.zeros((5, 5)))


def test_rollout_exhausts_tiny_map_gracefully():
    # 2x2 map cannot supply 10 distinct fallback cells; run ends early
    sal = uniform_map(2)
    cfg = RolloutConfig(n_fixations=10, mask_radius_frac=0.9, image_side=100)
    sp = rollout(sal, cfg)
    assert len(sp) == 4


# ---------------------------------------------------------------------------
# estimator surface
# ---------------------------------------------------------------------------


def test_predictor_params_round_trip():
    est = ScanpathPredictor(n_fixations=7, decay="linear", gamma=0.4)
    params = est.get_params()
    assert params["n_fixations"] == 7
    assert params["decay"] == "linear"
    cloned = clone(est)
    assert cloned.get_params() == params


def test_predictor_predict_matches_rollout():
    rng = np.random.default_rng(3)
    sal = SaliencyMap(rng.random((40, 40)))
    est = ScanpathPredictor(n_fixations=5, image_side=40).fit()
    direct = rollout(sal, RolloutConfig(n_fixations=5, image_side=40))
    assert [(f.x, f.y) for f in est.predict(sal).fixations] == [
        (f.x, f.y) for f in direct.fixations
    ]


def test_predictor_validates_on_fit():
    with pytest.raises(ValidationError):
        ScanpathPredictor(gamma=2.0).fit()
    with pytest.raises(ValidationError):
        ScanpathPredictor(decay="nope").fit()
