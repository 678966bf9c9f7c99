"""Scanpath comparison metrics.

Four complementary measures: dynamic time warping (location + order),
Eyenalysis double-mapping distance (location only), and the two
cross-recurrence percentages Determinism (order only) and Laminarity
(neither; clustering on repeated locations).

All distances are Euclidean in normalized [0,1]^2 coordinates. DTW and
Eyenalysis therefore come out in unit-square units by default; callers that
want magnitudes comparable to grid-based tooling can pass ``coord_scale``
(e.g. ``image_side / 100`` to report in grid-percent units). Determinism and
Laminarity are percentages and scale-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import Scanpath, ValidationError


@dataclass(frozen=True)
class RecurrenceConfig:
    """Cross-recurrence parameters: distance threshold and minimum run length."""

    rho: float = 0.1
    min_line_len: int = 2

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise ValidationError(f"rho must be > 0, got {self.rho}")
        if self.min_line_len < 2:
            raise ValidationError(f"min_line_len must be >= 2, got {self.min_line_len}")


@dataclass(frozen=True)
class MetricReport:
    """The four metric values for one (predicted, ground-truth) pair."""

    dtw: float
    eyenalysis: float
    determinism_pct: float
    laminarity_pct: float
    recurrence_count: int

    def __post_init__(self) -> None:
        for name in ("dtw", "eyenalysis", "determinism_pct", "laminarity_pct"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValidationError(f"{name} is not finite: {value}")
        if self.dtw < 0 or self.eyenalysis < 0:
            raise ValidationError("distance metrics must be non-negative")
        if not (0 <= self.determinism_pct <= 100 and 0 <= self.laminarity_pct <= 100):
            raise ValidationError("percentage metrics must lie in [0,100]")
        if self.recurrence_count < 0:
            raise ValidationError("recurrence_count must be >= 0")

    METRIC_NAMES = ("dtw", "eyenalysis", "determinism_pct", "laminarity_pct")

    def as_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in self.METRIC_NAMES}


def _points(sp: Scanpath) -> np.ndarray:
    pts = sp.points()
    if len(pts) == 0:
        raise ValidationError("empty scanpath")
    return pts


def _pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def dtw(a: Scanpath, b: Scanpath) -> float:
    """Dynamic time warping distance between two scanpaths.

    Classic accumulated-cost recurrence over the Euclidean point-distance
    matrix: the first row and column accumulate along the edge, interior
    cells add the cheapest of the three monotone predecessors, and the
    result is the raw accumulated sum at the far corner (no path-length
    normalization).
    """
    da = _pairwise_distances(_points(a), _points(b))
    na, nb = da.shape
    acc = np.empty_like(da)
    acc[0, 0] = da[0, 0]
    for j in range(1, nb):
        acc[0, j] = acc[0, j - 1] + da[0, j]
    for i in range(1, na):
        acc[i, 0] = acc[i - 1, 0] + da[i, 0]
        for j in range(1, nb):
            acc[i, j] = da[i, j] + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return float(acc[na - 1, nb - 1])


def eyenalysis(a: Scanpath, b: Scanpath) -> float:
    """Symmetric nearest-neighbor double-mapping distance.

    Every fixation of each scanpath is mapped to its spatially closest
    fixation in the other; the result is the average of all those
    nearest-neighbor distances, so it is symmetric in its arguments and
    ignores fixation order.
    """
    d = _pairwise_distances(_points(a), _points(b))
    total = d.min(axis=1).sum() + d.min(axis=0).sum()
    return float(total / (d.shape[0] + d.shape[1]))


def cross_recurrence_matrix(
    a: Scanpath, b: Scanpath, cfg: RecurrenceConfig = RecurrenceConfig()
) -> np.ndarray:
    """Binary |a| x |b| matrix: cell (i, j) is 1 iff d(a_i, b_j) <= rho."""
    d = _pairwise_distances(_points(a), _points(b))
    return (d <= cfg.rho).astype(np.uint8)


def _run_lengths(line: np.ndarray) -> list[int]:
    """Lengths of maximal runs of ones along a 1-D binary array."""
    runs: list[int] = []
    count = 0
    for v in line:
        if v:
            count += 1
        elif count:
            runs.append(count)
            count = 0
    if count:
        runs.append(count)
    return runs


def _points_on_long_runs(matrix: np.ndarray, min_len: int, direction: str) -> int:
    """Count recurrent points lying on runs of length >= min_len.

    ``direction`` selects the line family: 'diagonal' walks offsets of the
    main diagonal, 'horizontal' walks rows, 'vertical' walks columns. Each
    cell belongs to exactly one line per family, so points are counted once
    per direction class.
    """
    n_rows, n_cols = matrix.shape
    if direction == "diagonal":
        lines = (np.diagonal(matrix, offset=k) for k in range(-(n_rows - 1), n_cols))
    elif direction == "horizontal":
        lines = (matrix[i, :] for i in range(n_rows))
    elif direction == "vertical":
        lines = (matrix[:, j] for j in range(n_cols))
    else:  # pragma: no cover
        raise ValueError(direction)
    return sum(r for line in lines for r in _run_lengths(np.asarray(line)) if r >= min_len)


def determinism(
    a: Scanpath, b: Scanpath, cfg: RecurrenceConfig = RecurrenceConfig()
) -> float:
    """Percentage of cross-recurrent points on diagonal runs of length >= L.

    Diagonal alignments mark shared fixation sub-trajectories. Returns 0
    when the matrix has no recurrent points.
    """
    matrix = cross_recurrence_matrix(a, b, cfg)
    return determinism_from_matrix(matrix, cfg.min_line_len)


def laminarity(
    a: Scanpath, b: Scanpath, cfg: RecurrenceConfig = RecurrenceConfig()
) -> float:
    """Percentage of cross-recurrent points on horizontal/vertical runs.

    Horizontal and vertical runs mark one scanpath dwelling on a location
    the other visits, i.e. clustering on a few spots. Returns 0 when the
    matrix has no recurrent points.
    """
    matrix = cross_recurrence_matrix(a, b, cfg)
    return laminarity_from_matrix(matrix, cfg.min_line_len)


def determinism_from_matrix(matrix: np.ndarray, min_line_len: int = 2) -> float:
    """Determinism percentage of an explicit binary recurrence matrix."""
    total = int(matrix.sum())
    if total == 0:
        return 0.0
    on_runs = _points_on_long_runs(matrix, min_line_len, "diagonal")
    return 100.0 * on_runs / total


def laminarity_from_matrix(matrix: np.ndarray, min_line_len: int = 2) -> float:
    """Laminarity percentage of an explicit binary recurrence matrix."""
    total = int(matrix.sum())
    if total == 0:
        return 0.0
    hl = _points_on_long_runs(matrix, min_line_len, "horizontal")
    vl = _points_on_long_runs(matrix, min_line_len, "vertical")
    return 100.0 * (hl + vl) / (2 * total)


def compare(
    a: Scanpath,
    b: Scanpath,
    cfg: RecurrenceConfig = RecurrenceConfig(),
    coord_scale: float = 1.0,
) -> MetricReport:
    """Evaluate all four metrics for one scanpath pair.

    ``coord_scale`` multiplies the distance-valued metrics (DTW,
    Eyenalysis), which is equivalent to scaling both scanpaths' coordinates
    by that factor first. The recurrence threshold ``cfg.rho`` always
    applies in normalized units.
    """
    if coord_scale <= 0 or not np.isfinite(coord_scale):
        raise ValidationError(f"coord_scale must be positive and finite, got {coord_scale}")
    matrix = cross_recurrence_matrix(a, b, cfg)
    return MetricReport(
        dtw=dtw(a, b) * coord_scale,
        eyenalysis=eyenalysis(a, b) * coord_scale,
        determinism_pct=determinism_from_matrix(matrix, cfg.min_line_len),
        laminarity_pct=laminarity_from_matrix(matrix, cfg.min_line_len),
        recurrence_count=int(matrix.sum()),
    )
