from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scanpathkit import (
    DecayKind,
    ElementBox,
    ElementCategory,
    Fixation,
    GuiType,
    RolloutConfig,
    SaliencyMap,
    Scanpath,
    ValidationError,
    validate_scanpath,
)
from scanpathkit.types import denormalize_point, normalize_point


def test_fixation_bounds():
    Fixation(0.0, 0.0)
    Fixation(1.0, 1.0, duration_ms=0.0, t_ms=12.5)
    with pytest.raises(ValidationError):
        Fixation(1.2, 0.5)
    with pytest.raises(ValidationError):
        Fixation(0.5, -0.01)
    with pytest.raises(ValidationError):
        Fixation(float("nan"), 0.5)
    with pytest.raises(ValidationError):
        Fixation(0.5, 0.5, duration_ms=-1.0)


def test_scanpath_time_ordering():
    good = Scanpath((Fixation(0.1, 0.1, t_ms=0), Fixation(0.2, 0.2, t_ms=5)))
    assert len(good) == 2
    with pytest.raises(ValidationError):
        Scanpath((Fixation(0.1, 0.1, t_ms=5), Fixation(0.2, 0.2, t_ms=0)))
    # missing timestamps on some fixations: ordering not enforced
    Scanpath((Fixation(0.1, 0.1, t_ms=5), Fixation(0.2, 0.2)))


def test_gui_type_parsing_is_closed():
    assert GuiType.parse("Mobile") is GuiType.MOBILE
    with pytest.raises(ValidationError):
        GuiType.parse("tablet")


def test_element_category_parsing_is_closed():
    assert ElementCategory.parse("FACE") is ElementCategory.FACE
    with pytest.raises(ValidationError):
        ElementCategory.parse("icon")


def test_element_box_invariants():
    box = ElementBox(0.1, 0.1, 0.4, 0.3, ElementCategory.TEXT, "e0")
    assert box.contains(0.25, 0.2)
    assert not box.contains(0.5, 0.2)
    with pytest.raises(ValidationError):
        ElementBox(0.4, 0.1, 0.1, 0.3, ElementCategory.TEXT, "e1")
    with pytest.raises(ValidationError):
        ElementBox(0.1, 0.1, 1.4, 0.3, ElementCategory.TEXT, "e2")


def test_rollout_config_domains():
    RolloutConfig()
    with pytest.raises(ValidationError):
        RolloutConfig(gamma=1.0)
    with pytest.raises(ValidationError):
        RolloutConfig(gamma=0.0)
    with pytest.raises(ValidationError):
        RolloutConfig(mask_radius_frac=1.0)
    with pytest.raises(ValidationError):
        RolloutConfig(n_fixations=0)


def test_decay_kind_parse():
    assert DecayKind.parse("linear") is DecayKind.BASELINE_LINEAR
    assert DecayKind.parse("gamma") is DecayKind.EXPONENTIAL_GAMMA
    with pytest.raises(ValidationError):
        DecayKind.parse("cosine")


def test_saliency_map_invariants():
    SaliencyMap(np.ones((2, 2)))
    with pytest.raises(ValidationError):
        SaliencyMap(np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        SaliencyMap(np.array([[1.0, -0.1]]))
    with pytest.raises(ValidationError):
        SaliencyMap(np.array([[1.0, float("nan")]]))
    with pytest.raises(ValidationError):
        SaliencyMap(np.ones(3))


def test_saliency_map_is_read_only():
    sal = SaliencyMap(np.ones((2, 2)))
    with pytest.raises(ValueError):
        sal.values[0, 0] = 5.0


def test_validate_scanpath_midpoint():
    sp = validate_scanpath([(960, 600)], (1920, 1200))
    assert sp.fixations[0] == Fixation(0.5, 0.5)
    assert sp.clamp_count == 0


def test_validate_scanpath_boundary_not_clamped():
    sp = validate_scanpath([(1920, 1200)], (1920, 1200))
    assert sp.fixations[0] == Fixation(1.0, 1.0)
    assert sp.clamp_count == 0


def test_validate_scanpath_clamps_and_counts():
    sp = validate_scanpath([(2000, 600)], (1920, 1200))
    assert sp.fixations[0] == Fixation(1.0, 0.5)
    assert sp.clamp_count == 1


def test_validate_scanpath_errors():
    with pytest.raises(ValidationError):
        validate_scanpath([], (100, 100))
    with pytest.raises(ValidationError):
        validate_scanpath([(float("inf"), 5)], (100, 100))


def test_validate_scanpath_keeps_timing():
    sp = validate_scanpath([(10, 10, 0.0, 150.0), (20, 20, 200.0, None)], (100, 100))
    assert sp.fixations[0].duration_ms == 150.0
    assert sp.fixations[1].t_ms == 200.0
    assert sp.fixations[1].duration_ms is None


@given(
    st.integers(1, 4000),
    st.integers(1, 4000),
    st.floats(0, 1, allow_nan=False),
    st.floats(0, 1, allow_nan=False),
)
@settings(max_examples=100, deadline=None)
def test_normalization_round_trip_within_half_pixel(width, height, fx, fy):
    x_px, y_px = fx * width, fy * height
    nx, ny = normalize_point(x_px, y_px, width, height)
    bx, by = denormalize_point(nx, ny, width, height)
    assert abs(bx - x_px) <= 0.5
    assert abs(by - y_px) <= 0.5
