"""Element visit/revisit analysis and the statistical comparison machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as scipy_stats

from .types import ElementBox, ElementCategory, Scanpath, ValidationError

REVISIT_GAP = 3  # minimum number of intervening fixations on other elements


def map_fixations_to_elements(
    sp: Scanpath, boxes: Sequence[ElementBox]
) -> list[str | None]:
    """Map each fixation to the smallest-area containing box.

    Fixations outside every box map to ``None`` (background). Overlapping
    boxes are resolved by the smallest area, so nested boxes attribute the
    fixation to the innermost element.
    """
    ordered = sorted(boxes, key=lambda box: (box.area, box.element_id))
    sequence: list[str | None] = []
    for fixation in sp.fixations:
        hit = next(
            (box.element_id for box in ordered if box.contains(fixation.x, fixation.y)),
            None,
        )
        sequence.append(hit)
    return sequence


@dataclass(frozen=True)
class CategoryStats:
    visited_count: int
    revisited_count: int
    visited_ratio: float
    revisited_ratio: float

    def __post_init__(self) -> None:
        if self.revisited_count > self.visited_count:
            raise ValidationError("revisited_count cannot exceed visited_count")
        for name in ("visited_ratio", "revisited_ratio"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0,1], got {value}")


@dataclass(frozen=True)
class VisitStats:
    """Per-category visit/revisit counts and ratios over the box population."""

    by_category: Mapping[ElementCategory, CategoryStats]


def _collapse_events(element_seq: Sequence[str | None]) -> list[tuple[str | None, int]]:
    """Collapse consecutive same-element fixations into (id, raw count) events."""
    events: list[tuple[str | None, int]] = []
    for eid in element_seq:
        if events and events[-1][0] == eid:
            events[-1] = (eid, events[-1][1] + 1)
        else:
            events.append((eid, 1))
    return events


def visit_revisit(
    element_seq: Sequence[str | None], boxes: Sequence[ElementBox]
) -> VisitStats:
    """Count visited and revisited elements per category.

    An element is visited once any fixation lands on it. It is revisited
    when a later fixation lands on it again with at least three intervening
    fixations, all on other elements or background. Consecutive fixations
    on the same element collapse into one visit event first, but the
    intervening gap is counted in raw fixations (background included).
    Background stretches are never visited or revisited themselves.
    """
    events = _collapse_events(element_seq)
    visited: set[str] = {eid for eid, _ in events if eid is not None}
    revisited: set[str] = set()
    for eid in visited:
        positions = [k for k, (event_id, _) in enumerate(events) if event_id == eid]
        for earlier, later in zip(positions, positions[1:]):
            gap = sum(count for _, count in events[earlier + 1 : later])
            if gap >= REVISIT_GAP:
                revisited.add(eid)
                break

    category_of = {box.element_id: box.category for box in boxes}
    stats: dict[ElementCategory, CategoryStats] = {}
    for category in ElementCategory:
        ids = [eid for eid, cat in category_of.items() if cat is category]
        total = len(ids)
        n_visited = sum(1 for eid in ids if eid in visited)
        n_revisited = sum(1 for eid in ids if eid in revisited)
        stats[category] = CategoryStats(
            visited_count=n_visited,
            revisited_count=n_revisited,
            visited_ratio=n_visited / total if total else 0.0,
            revisited_ratio=n_revisited / total if total else 0.0,
        )
    return VisitStats(by_category=stats)


@dataclass(frozen=True)
class PairedTestResult:
    t_statistic: float
    degrees_of_freedom: int
    p_value: float
    cohens_d: float
    n_pairs: int

    def __post_init__(self) -> None:
        if self.degrees_of_freedom != self.n_pairs - 1:
            raise ValidationError("degrees_of_freedom must equal n_pairs - 1")
        if not math.isfinite(self.p_value) or not 0.0 <= self.p_value <= 1.0:
            raise ValidationError(f"p_value must lie in [0,1], got {self.p_value}")


def paired_t_test(x: Sequence[float], y: Sequence[float]) -> PairedTestResult:
    """Two-tailed paired t-test on per-pair differences x - y.

    Uses sample (n-1) standard deviation; the effect size is the paired
    Cohen's d_z, mean(d) / sd(d). Raises on mismatched lengths, fewer than
    two pairs, or all-identical pairs (zero-variance differences).
    """
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValidationError(f"paired samples must be 1-D and equal length, got {xs.shape} vs {ys.shape}")
    n = xs.size
    if n < 2:
        raise ValidationError("paired t-test needs at least 2 pairs")
    diff = xs - ys
    sd = float(diff.std(ddof=1))
    if sd == 0.0:
        raise ValidationError("all pairwise differences are identical; t is undefined")
    mean = float(diff.mean())
    d_z = mean / sd
    t = d_z * math.sqrt(n)
    df = n - 1
    p = 2.0 * float(scipy_stats.t.sf(abs(t), df))
    return PairedTestResult(
        t_statistic=t,
        degrees_of_freedom=df,
        p_value=min(p, 1.0),
        cohens_d=d_z,
        n_pairs=n,
    )


def mean_sd(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and (n-1) standard deviation; sd is 0 for a singleton."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("cannot aggregate an empty group")
    if arr.size == 1 or np.all(arr == arr[0]):
        return float(arr[0] if arr.size == 1 else arr.mean()), 0.0
    return float(arr.mean()), float(arr.std(ddof=1))


def aggregate(grouped: Mapping) -> dict:
    """Mean +/- SD per group: key -> (mean, sd, n). Empty groups are errors."""
    out = {}
    for key, values in grouped.items():
        mean, sd = mean_sd(values)
        out[key] = (mean, sd, len(values))
    return out
