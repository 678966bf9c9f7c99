"""Core domain types and coordinate conventions.

All gaze coordinates are normalized to the unit square: x grows rightward,
y grows downward, both in [0, 1]. Pixel coordinates exist only at I/O
boundaries (dataset ingestion, CLI output) and are converted on the way in.

Every type validates its invariants at construction and is immutable
afterwards, so instances are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


class ValidationError(ValueError):
    """A domain type was constructed with invariant-violating values."""


class ParseError(ValueError):
    """An external file (manifest, scanpath CSV, density map) is malformed."""


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Fixation:
    """A single gaze point in normalized coordinates, with optional timing."""

    x: float
    y: float
    duration_ms: float | None = None
    t_ms: float | None = None

    def __post_init__(self) -> None:
        _check_finite("x", self.x)
        _check_finite("y", self.y)
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValidationError(
                f"fixation coordinates must lie in [0,1]^2, got ({self.x}, {self.y})"
            )
        for name in ("duration_ms", "t_ms"):
            value = getattr(self, name)
            if value is not None:
                _check_finite(name, value)
                if value < 0:
                    raise ValidationError(f"{name} must be >= 0, got {value}")


@dataclass(frozen=True)
class Scanpath:
    """An ordered, non-empty sequence of fixations over one image.

    ``clamp_count`` records how many ingested points were clamped back into
    bounds during normalization; downstream reports surface it.
    """

    fixations: tuple[Fixation, ...]
    image_id: str = ""
    viewer_id: str | None = None
    clamp_count: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "fixations", tuple(self.fixations))
        if len(self.fixations) < 1:
            raise ValidationError("a scanpath needs at least one fixation")
        times = [f.t_ms for f in self.fixations]
        if all(t is not None for t in times):
            for earlier, later in zip(times, times[1:]):
                if later < earlier:  # type: ignore[operator]
                    raise ValidationError("t_ms must be non-decreasing")
        if self.clamp_count < 0:
            raise ValidationError("clamp_count must be >= 0")

    def __len__(self) -> int:
        return len(self.fixations)

    def points(self) -> np.ndarray:
        """Fixation coordinates as an (n, 2) float array of (x, y) rows."""
        return np.array([(f.x, f.y) for f in self.fixations], dtype=np.float64)


class GuiType(Enum):
    POSTER = "poster"
    DESKTOP = "desktop"
    MOBILE = "mobile"
    WEB = "web"

    @classmethod
    def parse(cls, text: str) -> "GuiType":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValidationError(f"unknown GUI type {text!r}; expected one of: {valid}")


class ElementCategory(Enum):
    IMAGE = "image"
    TEXT = "text"
    FACE = "face"

    @classmethod
    def parse(cls, text: str) -> "ElementCategory":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValidationError(
                f"unknown element category {text!r}; expected one of: {valid}"
            )


@dataclass(frozen=True)
class ElementBox:
    """An axis-aligned GUI element box in normalized coordinates."""

    x0: float
    y0: float
    x1: float
    y1: float
    category: ElementCategory
    element_id: str

    def __post_init__(self) -> None:
        for name in ("x0", "y0", "x1", "y1"):
            value = getattr(self, name)
            _check_finite(name, value)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"box corner {name}={value} outside [0,1]")
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValidationError(
                f"degenerate box ({self.x0},{self.y0},{self.x1},{self.y1})"
            )

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


class DecayKind(Enum):
    """How strongly an older fixation's neighborhood stays suppressed."""

    BASELINE_LINEAR = "linear"
    EXPONENTIAL_GAMMA = "gamma"

    @classmethod
    def parse(cls, text: str) -> "DecayKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValidationError(f"unknown decay kind {text!r}; expected one of: {valid}")


@dataclass(frozen=True)
class RolloutConfig:
    """Design parameters of the greedy scanpath generator.

    Defaults are the best-performing values from the parameter study:
    225 px square input, exponential decay with gamma 0.1, masking radius
    10% of the image side, 10 fixations.
    """

    n_fixations: int = 10
    decay: DecayKind = DecayKind.EXPONENTIAL_GAMMA
    gamma: float = 0.1
    mask_radius_frac: float = 0.1
    image_side: int = 225

    def __post_init__(self) -> None:
        if self.n_fixations < 1:
            raise ValidationError(f"n_fixations must be >= 1, got {self.n_fixations}")
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError(f"gamma must lie in (0,1), got {self.gamma}")
        if not 0.0 < self.mask_radius_frac < 1.0:
            raise ValidationError(
                f"mask_radius_frac must lie in (0,1), got {self.mask_radius_frac}"
            )
        if self.image_side < 1:
            raise ValidationError(f"image_side must be >= 1, got {self.image_side}")


class SaliencyMap:
    """A non-negative 2-D attention density grid.

    Values are finite, >= 0 and not all zero. The backing array is made
    read-only so instances can be shared freely.
    """

    __slots__ = ("values",)

    def __init__(self, values: np.ndarray | Sequence[Sequence[float]]):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"saliency map must be 2-D and non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("saliency map contains non-finite values")
        if np.any(arr < 0):
            raise ValidationError("saliency map contains negative values")
        if not np.any(arr > 0):
            raise ValidationError("saliency map is all-zero")
        arr = arr.copy()
        arr.setflags(write=False)
        self.values = arr

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def __repr__(self) -> str:  # pragma: no cover
        return f"SaliencyMap({self.width}x{self.height})"


def normalize_point(x_px: float, y_px: float, width: int, height: int) -> tuple[float, float]:
    """Pixel coordinates -> unit square. Does not clamp."""
    if width < 1 or height < 1:
        raise ValidationError(f"image dimensions must be positive, got {width}x{height}")
    return x_px / width, y_px / height


def denormalize_point(x: float, y: float, width: int, height: int) -> tuple[float, float]:
    """Unit square -> pixel coordinates (inverse of :func:`normalize_point`)."""
    return x * width, y * height


def validate_scanpath(
    records: Iterable[Sequence[float]],
    image_dims: tuple[int, int],
    image_id: str = "",
    viewer_id: str | None = None,
) -> Scanpath:
    """Build a Scanpath from raw pixel-coordinate fixation records.

    Each record is ``(x_px, y_px)`` optionally followed by ``t_ms`` and
    ``duration_ms`` (``None`` for absent values). Coordinates are divided by
    the image dimensions; out-of-bounds points are clamped into [0,1] and
    counted in ``clamp_count`` rather than rejected, because eye trackers
    routinely emit slight overshoot.

    Raises :class:`ValidationError` on an empty record list or non-finite
    coordinates.
    """
    width, height = image_dims
    fixations: list[Fixation] = []
    clamped = 0
    for record in records:
        x_px, y_px = float(record[0]), float(record[1])
        t_ms = float(record[2]) if len(record) > 2 and record[2] is not None else None
        duration_ms = float(record[3]) if len(record) > 3 and record[3] is not None else None
        if not (math.isfinite(x_px) and math.isfinite(y_px)):
            raise ValidationError(f"non-finite fixation coordinates ({x_px}, {y_px})")
        x, y = normalize_point(x_px, y_px, width, height)
        cx = min(max(x, 0.0), 1.0)
        cy = min(max(y, 0.0), 1.0)
        if cx != x or cy != y:
            clamped += 1
        fixations.append(Fixation(cx, cy, duration_ms=duration_ms, t_ms=t_ms))
    if not fixations:
        raise ValidationError("empty fixation record list")
    return Scanpath(
        tuple(fixations), image_id=image_id, viewer_id=viewer_id, clamp_count=clamped
    )
