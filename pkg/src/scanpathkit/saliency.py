"""Saliency map production for GUI screenshots.

Two sources: a built-in first-principles backend (Gaussian pyramid,
intensity/color-opponency/orientation channels, center-surround contrast)
that needs no trained weights, and a loader for density maps exported by
external neural models.

All resampling in this module is bilinear with half-pixel-center alignment
and edge clamping. That convention is deliberately hand-rolled: it is
equivariant under 180-degree rotation (up to float rounding), preserves the
input value range (convex weights), and resizing to the source size is
bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage
from sklearn.base import BaseEstimator

from .types import ParseError, SaliencyMap, ValidationError

MIN_IMAGE_EXTENT = 8  # pyramid construction needs some room

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}

# Frozen orientation filter constants; outputs are pinned by golden tests.
_GABOR_SIZE = 9
_GABOR_SIGMA = 2.3
_GABOR_WAVELENGTH = 7.0
_ORIENTATIONS_DEG = (0.0, 45.0, 90.0, 135.0)

_BINOMIAL_5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


@dataclass(frozen=True)
class GuiImage:
    """An RGB screenshot held as an (h, w, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
            raise ValidationError(
                f"expected (h, w, 3) uint8 pixels, got shape {arr.shape} dtype {arr.dtype}"
            )
        if arr.shape[0] < MIN_IMAGE_EXTENT or arr.shape[1] < MIN_IMAGE_EXTENT:
            raise ValidationError(
                f"image must be at least {MIN_IMAGE_EXTENT}px on each side, "
                f"got {arr.shape[1]}x{arr.shape[0]}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def load_image(path: str | Path) -> GuiImage:
    """Decode a PNG/JPEG screenshot into a GuiImage."""
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            return GuiImage(np.asarray(rgb, dtype=np.uint8))
    except (OSError, SyntaxError) as exc:
        raise ParseError(f"cannot decode image {path}: {exc}") from exc


def bilinear_resample(values: np.ndarray, target_h: int, target_w: int) -> np.ndarray:
    """Resample a 2-D grid or (h, w, c) stack to the target size.

    Half-pixel-center sampling with clamp-to-edge. Output values are convex
    combinations of inputs, so the value range never widens. Same-size calls
    return an identical copy.
    """
    if target_h < 1 or target_w < 1:
        raise ValidationError(f"degenerate resize target {target_w}x{target_h}")
    src_h, src_w = values.shape[0], values.shape[1]
    out = values.astype(np.float64, copy=True)
    if (target_h, target_w) == (src_h, src_w):
        return out

    def coords(n_src: int, n_dst: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pos = (np.arange(n_dst, dtype=np.float64) + 0.5) * (n_src / n_dst) - 0.5
        lo = np.floor(pos)
        frac = pos - lo
        lo = lo.astype(np.int64)
        return np.clip(lo, 0, n_src - 1), np.clip(lo + 1, 0, n_src - 1), frac

    y0, y1, wy = coords(src_h, target_h)
    x0, x1, wx = coords(src_w, target_w)
    if out.ndim == 3:
        wx = wx[None, :, None]
        wy = wy[:, None, None]
    else:
        wx = wx[None, :]
        wy = wy[:, None]
    top = out[y0][:, x0] * (1.0 - wx) + out[y0][:, x1] * wx
    bottom = out[y1][:, x0] * (1.0 - wx) + out[y1][:, x1] * wx
    return top * (1.0 - wy) + bottom * wy


def resize(img: GuiImage, target_w: int, target_h: int) -> GuiImage:
    """Bilinearly resize a screenshot to exactly (target_w, target_h).

    Aspect ratio is deliberately not preserved; distorting inputs to a
    square is part of the studied preprocessing. Fractional results round
    half to even (so an exact 127.5 midpoint sample becomes 128).
    """
    if target_w < MIN_IMAGE_EXTENT or target_h < MIN_IMAGE_EXTENT:
        raise ValidationError(
            f"resize target must be at least {MIN_IMAGE_EXTENT}px, got {target_w}x{target_h}"
        )
    if (target_w, target_h) == (img.width, img.height):
        return GuiImage(img.pixels.copy())
    resampled = bilinear_resample(img.pixels, target_h, target_w)
    return GuiImage(np.rint(resampled).astype(np.uint8))


# ---------------------------------------------------------------------------
# First-principles backend
# ---------------------------------------------------------------------------


def _gabor_kernel(theta_deg: float) -> np.ndarray:
    """Even-phase oriented band-pass kernel, zero-mean and L1-normalized."""
    half = _GABOR_SIZE // 2
    ys, xs = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
    theta = math.radians(theta_deg)
    xr = xs * math.cos(theta) + ys * math.sin(theta)
    yr = -xs * math.sin(theta) + ys * math.cos(theta)
    kernel = np.exp(-(xr**2 + yr**2) / (2.0 * _GABOR_SIGMA**2)) * np.cos(
        2.0 * np.pi * xr / _GABOR_WAVELENGTH
    )
    kernel -= kernel.mean()
    return kernel / np.abs(kernel).sum()


_GABOR_KERNELS = tuple(_gabor_kernel(theta) for theta in _ORIENTATIONS_DEG)


def _blur(grid: np.ndarray) -> np.ndarray:
    out = ndimage.correlate1d(grid, _BINOMIAL_5, axis=0, mode="reflect")
    return ndimage.correlate1d(out, _BINOMIAL_5, axis=1, mode="reflect")


def _pyramid(channel: np.ndarray, n_levels: int) -> list[np.ndarray]:
    """Gaussian pyramid by blur + bilinear ceil-halving; stops at 1x1."""
    levels = [channel]
    while len(levels) < n_levels:
        h, w = levels[-1].shape
        if h == 1 and w == 1:
            break
        levels.append(bilinear_resample(_blur(levels[-1]), (h + 1) // 2, (w + 1) // 2))
    return levels


def _center_surround(
    pyramid: list[np.ndarray], centers: tuple[int, ...], deltas: tuple[int, ...]
) -> list[np.ndarray]:
    """Across-scale absolute differences |center - upsampled surround|.

    Scale pairs that exceed the pyramid depth clamp to the deepest level;
    that is the fall-back for small inputs.
    """
    last = len(pyramid) - 1
    pairs: list[tuple[int, int]] = []
    for c in centers:
        for delta in deltas:
            c_eff = min(c, last - 1)
            s = min(c_eff + delta, last)
            if c_eff >= 0 and s > c_eff and (c_eff, s) not in pairs:
                pairs.append((c_eff, s))
    if not pairs:
        raise ValidationError("image too small for any center-surround scale pair")
    maps = []
    for c, s in pairs:
        h, w = pyramid[c].shape
        maps.append(np.abs(pyramid[c] - bilinear_resample(pyramid[s], h, w)))
    return maps


def _mean_other_local_maxima(grid: np.ndarray, tile: int = 4) -> float:
    """Average of tile maxima excluding one instance of the global maximum."""
    h, w = grid.shape
    maxima = sorted(
        grid[y : y + tile, x : x + tile].max()
        for y in range(0, h, tile)
        for x in range(0, w, tile)
    )
    maxima.pop()
    return float(np.mean(maxima)) if maxima else 0.0


def _promote_peaks(grid: np.ndarray) -> np.ndarray:
    """Map normalization: range-normalize, then weight by peak isolation.

    After scaling to [0, 1] the map is multiplied by
    ``(global_max - mean_of_other_local_maxima)^2`` (the global max is 1
    after scaling). Maps with one outstanding peak keep their weight; maps
    with many comparable peaks are demoted. Flat maps carry no signal and
    return zeros.
    """
    lo = float(grid.min())
    hi = float(grid.max())
    if hi - lo < 1e-12:
        return np.zeros_like(grid)
    scaled = (grid - lo) / (hi - lo)
    coeff = (1.0 - _mean_other_local_maxima(scaled)) ** 2
    return scaled * coeff


def _conspicuity(feature_maps: list[np.ndarray], target_shape: tuple[int, int]) -> np.ndarray:
    acc = np.zeros(target_shape, dtype=np.float64)
    for fmap in feature_maps:
        acc += bilinear_resample(_promote_peaks(fmap), *target_shape)
    return acc


def itti_koch_saliency(
    img: GuiImage,
    pyramid_levels: int = 9,
    center_scales: tuple[int, ...] = (2, 3, 4),
    surround_deltas: tuple[int, ...] = (3, 4),
) -> SaliencyMap:
    """Compute a saliency map from image structure alone.

    Channels: intensity (r+g+b)/3, red-green and blue-yellow opponency, and
    four oriented band-pass responses at 0/45/90/135 degrees. Each channel
    runs center-surround contrast across pyramid scales, per-map peak
    normalization, and equal-weight summation at 1/16 input resolution
    before upsampling back. Output is min-max normalized to [0, 1]; an
    input with no contrast anywhere yields a constant all-ones map.
    """
    rgb = img.pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    intensity = (r + g + b) / 3.0

    denom = np.maximum(np.maximum(r, g), b)
    denom = np.maximum(denom, 1e-4)
    red_green = np.clip((r - g) / denom, 0.0, None)
    blue_yellow = np.clip((b - np.minimum(r, g)) / denom, 0.0, None)

    int_pyr = _pyramid(intensity, pyramid_levels)
    target_shape = int_pyr[min(4, len(int_pyr) - 1)].shape

    intensity_cm = _conspicuity(
        _center_surround(int_pyr, center_scales, surround_deltas), target_shape
    )
    color_cm = _conspicuity(
        _center_surround(_pyramid(red_green, pyramid_levels), center_scales, surround_deltas)
        + _center_surround(_pyramid(blue_yellow, pyramid_levels), center_scales, surround_deltas),
        target_shape,
    )
    orientation_cm = np.zeros(target_shape, dtype=np.float64)
    for kernel in _GABOR_KERNELS:
        oriented = [ndimage.correlate(level, kernel, mode="reflect") for level in int_pyr]
        per_theta = _conspicuity(
            _center_surround(oriented, center_scales, surround_deltas), target_shape
        )
        orientation_cm += _promote_peaks(per_theta)

    combined = (
        _promote_peaks(intensity_cm)
        + _promote_peaks(color_cm)
        + _promote_peaks(orientation_cm)
    ) / 3.0

    full = bilinear_resample(combined, img.height, img.width)
    lo = float(full.min())
    hi = float(full.max())
    if hi - lo < 1e-12:
        return SaliencyMap(np.ones_like(full))
    return SaliencyMap((full - lo) / (hi - lo))


class IttiKochSaliency(BaseEstimator):
    """Transformer wrapper around :func:`itti_koch_saliency`.

    Stateless; ``fit`` only validates parameters. ``transform`` accepts a
    :class:`GuiImage` or a raw (h, w, 3) uint8 array.
    """

    def __init__(
        self,
        pyramid_levels: int = 9,
        center_scales: tuple[int, ...] = (2, 3, 4),
        surround_deltas: tuple[int, ...] = (3, 4),
    ):
        self.pyramid_levels = pyramid_levels
        self.center_scales = center_scales
        self.surround_deltas = surround_deltas

    def fit(self, X=None, y=None) -> "IttiKochSaliency":
        if self.pyramid_levels < 2:
            raise ValidationError("pyramid_levels must be >= 2")
        return self

    def transform(self, X: GuiImage | np.ndarray) -> SaliencyMap:
        img = X if isinstance(X, GuiImage) else GuiImage(np.asarray(X, dtype=np.uint8))
        return itti_koch_saliency(
            img,
            pyramid_levels=self.pyramid_levels,
            center_scales=tuple(self.center_scales),
            surround_deltas=tuple(self.surround_deltas),
        )


# ---------------------------------------------------------------------------
# Density map files
# ---------------------------------------------------------------------------


def save_density_map(values: np.ndarray | SaliencyMap, path: str | Path) -> None:
    """Write a density grid to disk.

    Text format (any non-image suffix): first line ``width height``, then
    one line per row of space-separated decimals, written with full repr so
    a load round-trips losslessly. A ``.png`` suffix instead writes 16-bit
    grayscale with values scaled by 65535 (values must lie in [0, 1]).
    """
    grid = values.values if isinstance(values, SaliencyMap) else np.asarray(values, dtype=np.float64)
    path = Path(path)
    if path.suffix.lower() in _IMAGE_SUFFIXES:
        if grid.min() < 0 or grid.max() > 1:
            raise ValidationError("16-bit image export needs values in [0,1]")
        quantized = np.round(grid * 65535.0).astype(np.uint16)
        Image.fromarray(quantized).save(path)
        return
    lines = [f"{grid.shape[1]} {grid.shape[0]}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in grid)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_text_density(path: Path) -> np.ndarray:
    raw_lines = path.read_text(encoding="utf-8").splitlines()
    if not raw_lines:
        raise ParseError(f"{path}: empty density-map file")
    header = raw_lines[0].split()
    if len(header) != 2:
        raise ParseError(f"{path}: header must be 'width height', got {raw_lines[0]!r}")
    try:
        width, height = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"{path}: non-integer dimensions in header") from exc
    body = [line for line in raw_lines[1:] if line.strip()]
    if len(body) != height:
        raise ParseError(f"{path}: expected {height} rows, found {len(body)}")
    grid = np.empty((height, width), dtype=np.float64)
    for row_idx, line in enumerate(body):
        cells = line.split()
        if len(cells) != width:
            raise ParseError(
                f"{path}: row {row_idx} has {len(cells)} values, expected {width}"
            )
        for col_idx, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError as exc:
                raise ParseError(
                    f"{path}: unparseable value at row {row_idx}, column {col_idx}: {cell!r}"
                ) from exc
            if not math.isfinite(value):
                raise ParseError(
                    f"{path}: non-finite value at row {row_idx}, column {col_idx}"
                )
            if value < 0:
                raise ParseError(
                    f"{path}: negative value at row {row_idx}, column {col_idx}"
                )
            grid[row_idx, col_idx] = value
    return grid


def _parse_image_density(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.mode not in ("I", "I;16", "I;16B", "I;16L"):
                raise ParseError(
                    f"{path}: expected 16-bit single-channel grayscale, got mode {img.mode!r}"
                )
            raw = np.asarray(img, dtype=np.float64)
    except (OSError, SyntaxError) as exc:
        raise ParseError(f"cannot decode density image {path}: {exc}") from exc
    if raw.min() < 0 or raw.max() > 65535:
        raise ParseError(f"{path}: sample values outside the 16-bit range")
    return raw / 65535.0


def load_density_map(
    path: str | Path,
    expected_w: int | None = None,
    expected_h: int | None = None,
    allow_resize: bool = False,
) -> SaliencyMap:
    """Load a density map exported by an external model.

    Values are validated finite and non-negative. When expected dimensions
    are given and differ from the file's, the map is bilinearly resized if
    ``allow_resize`` is set (bilinear weights keep values non-negative) and
    rejected otherwise.
    """
    path = Path(path)
    if path.suffix.lower() in _IMAGE_SUFFIXES:
        grid = _parse_image_density(path)
    else:
        grid = _parse_text_density(path)
    if expected_w is not None and expected_h is not None:
        if grid.shape != (expected_h, expected_w):
            if not allow_resize:
                raise ParseError(
                    f"{path}: dimensions {grid.shape[1]}x{grid.shape[0]} do not match "
                    f"expected {expected_w}x{expected_h} (pass allow_resize to rescale)"
                )
            grid = bilinear_resample(grid, expected_h, expected_w)
    try:
        return SaliencyMap(grid)
    except ValidationError as exc:
        raise ParseError(f"{path}: {exc}") from exc
