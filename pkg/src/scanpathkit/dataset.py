"""Dataset ingestion: manifests, scanpath CSV files, element boxes.

File formats
------------
Manifest: JSON object with an ``entries`` list. Each entry carries
``image_id``, ``image_path``, ``gui_type`` (poster/desktop/mobile/web),
``scanpath_paths`` (at least one), ``partition`` (train/test) and the
optional ``element_box_path``, ``density_path`` and ``screen_size``
``[width, height]``. Top-level optional keys: ``screen_size`` (default for
entries) and ``max_fixations`` (truncate every loaded scanpath). Relative
paths resolve against the manifest's directory.

Scanpath CSV: optional sidecar comment line ``# screen <width> <height>``,
then a header ``viewer_id,idx,x_px,y_px,t_ms,duration_ms``. One row per
fixation in pixel coordinates; ``t_ms``/``duration_ms`` may be empty. One
file may interleave several viewers; rows are ordered by ``idx`` within a
viewer. The screen size used for normalization comes from the manifest
(preferred) or the sidecar line.

Element boxes: JSON list of ``{"category", "x0", "y0", "x1", "y1"}`` in
normalized coordinates with an optional ``"id"``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .types import (
    ElementBox,
    ElementCategory,
    GuiType,
    ParseError,
    Scanpath,
    ValidationError,
    validate_scanpath,
)

SCANPATH_HEADER = ["viewer_id", "idx", "x_px", "y_px", "t_ms", "duration_ms"]


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    image_path: Path
    gui_type: GuiType
    scanpath_paths: tuple[Path, ...]
    partition: str
    element_box_path: Path | None = None
    density_path: Path | None = None
    screen_size: tuple[int, int] | None = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    max_fixations: int | None = None

    def __len__(self) -> int:
        return len(self.entries)


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a dataset manifest.

    Fails on malformed JSON, duplicate image ids, unknown GUI types or
    partitions, entries without ground-truth scanpaths, and referenced
    files that do not exist; the error message names the offending entry.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(payload, dict) or "entries" not in payload:
        raise ParseError(f"{path}: manifest must be an object with an 'entries' list")

    base = path.parent
    default_screen = payload.get("screen_size")
    max_fixations = payload.get("max_fixations")
    if max_fixations is not None and (not isinstance(max_fixations, int) or max_fixations < 1):
        raise ParseError(f"{path}: max_fixations must be a positive integer")

    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    problems: list[str] = []
    for raw in payload["entries"]:
        image_id = raw.get("image_id")
        if not image_id or not isinstance(image_id, str):
            problems.append("entry missing image_id")
            continue
        if image_id in seen:
            raise ParseError(f"{path}: duplicate image_id {image_id!r}")
        seen.add(image_id)
        try:
            gui_type = GuiType.parse(raw["gui_type"])
            partition = raw.get("partition", "train")
            if partition not in ("train", "test"):
                raise ValidationError(
                    f"partition must be 'train' or 'test', got {partition!r}"
                )
            scanpath_paths = tuple(base / p for p in raw.get("scanpath_paths", []))
            if not scanpath_paths:
                raise ValidationError("entry has no ground-truth scanpaths")
            image_path = base / raw["image_path"]
            box_path = base / raw["element_box_path"] if raw.get("element_box_path") else None
            density_path = base / raw["density_path"] if raw.get("density_path") else None
            screen = raw.get("screen_size", default_screen)
            screen_size = (int(screen[0]), int(screen[1])) if screen else None
            for file_path in (image_path, *scanpath_paths, box_path, density_path):
                if file_path is not None and not file_path.exists():
                    raise ValidationError(f"missing file {file_path}")
            entries.append(
                ManifestEntry(
                    image_id=image_id,
                    image_path=image_path,
                    gui_type=gui_type,
                    scanpath_paths=scanpath_paths,
                    partition=partition,
                    element_box_path=box_path,
                    density_path=density_path,
                    screen_size=screen_size,
                )
            )
        except (KeyError, ValidationError, TypeError) as exc:
            problems.append(f"entry {image_id!r}: {exc}")
    if problems:
        raise ParseError(f"{path}: " + "; ".join(problems))
    return DatasetManifest(entries=tuple(entries), max_fixations=max_fixations)


def read_scanpath_csv(
    path: str | Path,
    screen_size: tuple[int, int] | None = None,
    image_id: str = "",
    max_fixations: int | None = None,
) -> list[Scanpath]:
    """Parse one scanpath CSV into one Scanpath per viewer.

    ``screen_size`` overrides the sidecar ``# screen`` line; one of the two
    must provide the pixel dimensions used for normalization.
    """
    path = Path(path)
    sidecar: tuple[int, int] | None = None
    data_lines: list[str] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 3 and parts[0] == "screen":
                try:
                    sidecar = (int(parts[1]), int(parts[2]))
                except ValueError as exc:
                    raise ParseError(f"{path}: bad sidecar line {line!r}") from exc
            continue
        if line.strip():
            data_lines.append(line)
    dims = screen_size or sidecar
    if dims is None:
        raise ParseError(
            f"{path}: no screen dimensions; add a '# screen W H' sidecar line "
            "or a screen_size manifest field"
        )
    reader = csv.DictReader(data_lines)
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:4]] != SCANPATH_HEADER[:4]:
        raise ParseError(
            f"{path}: header must start with {','.join(SCANPATH_HEADER[:4])}, got {reader.fieldnames}"
        )

    def opt_float(row: dict, key: str) -> float | None:
        raw = (row.get(key) or "").strip()
        return float(raw) if raw else None

    per_viewer: dict[str, list[tuple[int, tuple]]] = {}
    for row_idx, row in enumerate(reader):
        try:
            viewer = row["viewer_id"].strip()
            idx = int(row["idx"])
            record = (
                float(row["x_px"]),
                float(row["y_px"]),
                opt_float(row, "t_ms"),
                opt_float(row, "duration_ms"),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"{path}: bad row {row_idx}: {exc}") from exc
        per_viewer.setdefault(viewer, []).append((idx, record))

    scanpaths = []
    for viewer, indexed in per_viewer.items():
        indexed.sort(key=lambda item: item[0])
        records = [record for _, record in indexed]
        if max_fixations is not None:
            records = records[:max_fixations]
        try:
            scanpaths.append(
                validate_scanpath(records, dims, image_id=image_id, viewer_id=viewer)
            )
        except ValidationError as exc:
            raise ParseError(f"{path}: viewer {viewer!r}: {exc}") from exc
    if not scanpaths:
        raise ParseError(f"{path}: no fixation rows")
    return scanpaths


def write_scanpath_csv(
    scanpaths: list[Scanpath], path: str | Path, screen_size: tuple[int, int]
) -> None:
    """Write scanpaths in the documented CSV format (pixel coordinates)."""
    width, height = screen_size
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# screen {width} {height}\n")
        writer = csv.writer(handle)
        writer.writerow(SCANPATH_HEADER)
        for sp in scanpaths:
            viewer = sp.viewer_id or "v0"
            for idx, fx in enumerate(sp.fixations):
                writer.writerow(
                    [
                        viewer,
                        idx,
                        repr(fx.x * width),
                        repr(fx.y * height),
                        "" if fx.t_ms is None else repr(fx.t_ms),
                        "" if fx.duration_ms is None else repr(fx.duration_ms),
                    ]
                )


def load_element_boxes(path: str | Path) -> list[ElementBox]:
    """Load normalized element boxes from a JSON list."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise ParseError(f"{path}: expected a JSON list of boxes")
    boxes = []
    for i, raw in enumerate(payload):
        try:
            boxes.append(
                ElementBox(
                    x0=float(raw["x0"]),
                    y0=float(raw["y0"]),
                    x1=float(raw["x1"]),
                    y1=float(raw["y1"]),
                    category=ElementCategory.parse(raw["category"]),
                    element_id=str(raw.get("id", f"e{i}")),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: box {i}: {exc}") from exc
    return boxes


def load_entry_scanpaths(
    entry: ManifestEntry, max_fixations: int | None = None
) -> list[Scanpath]:
    """All ground-truth scanpaths of a manifest entry, across its files."""
    scanpaths: list[Scanpath] = []
    for sp_path in entry.scanpath_paths:
        scanpaths.extend(
            read_scanpath_csv(
                sp_path,
                screen_size=entry.screen_size,
                image_id=entry.image_id,
                max_fixations=max_fixations,
            )
        )
    return scanpaths


# ---------------------------------------------------------------------------
# Synthetic fixture dataset
# ---------------------------------------------------------------------------

_FIXTURE_DIMS = {
    GuiType.POSTER: (225, 300),
    GuiType.DESKTOP: (320, 200),
    GuiType.MOBILE: (180, 320),
    GuiType.WEB: (300, 225),
}

_CATEGORY_CYCLE = (ElementCategory.IMAGE, ElementCategory.TEXT, ElementCategory.FACE)


def _draw_shape(
    canvas: np.ndarray, rng: np.random.Generator, kind: str
) -> tuple[int, int, int, int]:
    """Draw one high-contrast shape, returning its pixel bbox (x0, y0, x1, y1)."""
    h, w = canvas.shape[:2]
    sw = int(rng.integers(w // 8, w // 3))
    sh = int(rng.integers(h // 8, h // 3))
    x0 = int(rng.integers(0, w - sw))
    y0 = int(rng.integers(0, h - sh))
    color = rng.integers(0, 256, size=3, dtype=np.uint8)
    if kind == "disk":
        yy, xx = np.mgrid[0:h, 0:w]
        cx, cy = x0 + sw / 2, y0 + sh / 2
        radius = min(sw, sh) / 2
        mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= radius**2
        canvas[mask] = color
    elif kind == "stripes":
        # text-like block: alternating dark rows on a light card
        canvas[y0 : y0 + sh, x0 : x0 + sw] = 235
        for row in range(y0 + 2, y0 + sh - 2, 4):
            canvas[row : row + 2, x0 + 2 : x0 + sw - 2] = (40, 40, 40)
    else:
        canvas[y0 : y0 + sh, x0 : x0 + sw] = color
    return x0, y0, x0 + sw, y0 + sh


def generate_fixture_dataset(
    out_dir: str | Path, n_images: int = 12, seed: int = 7, n_viewers: int = 2
) -> Path:
    """Generate a small deterministic dataset for tests and demos.

    Produces geometric screenshots (three per GUI type by default), synthetic
    viewer scanpaths that hop between the drawn shapes, element boxes, and a
    manifest. Returns the manifest path. Identical arguments always produce
    identical files.
    """
    out_dir = Path(out_dir)
    for sub in ("images", "scanpaths", "boxes"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    gui_types = list(GuiType)
    entries = []
    for index in range(n_images):
        gui_type = gui_types[index % len(gui_types)]
        width, height = _FIXTURE_DIMS[gui_type]
        image_id = f"{gui_type.value}_{index:02d}"

        canvas = np.full((height, width, 3), int(rng.integers(160, 220)), dtype=np.uint8)
        boxes_px: list[tuple[int, int, int, int]] = []
        kinds = ["rect", "disk", "stripes"]
        for shape_idx in range(int(rng.integers(3, 6))):
            kind = kinds[shape_idx % len(kinds)]
            boxes_px.append(_draw_shape(canvas, rng, kind))
        Image.fromarray(canvas).save(out_dir / "images" / f"{image_id}.png")

        boxes_payload = []
        for box_idx, (x0, y0, x1, y1) in enumerate(boxes_px):
            boxes_payload.append(
                {
                    "id": f"{image_id}_e{box_idx}",
                    "category": _CATEGORY_CYCLE[box_idx % 3].value,
                    "x0": x0 / width,
                    "y0": y0 / height,
                    "x1": x1 / width,
                    "y1": y1 / height,
                }
            )
        (out_dir / "boxes" / f"{image_id}.json").write_text(
            json.dumps(boxes_payload, indent=1), encoding="utf-8"
        )

        scanpaths = []
        for viewer_idx in range(n_viewers):
            n_fix = int(rng.integers(8, 13))
            t_ms = 0.0
            records = []
            for _ in range(n_fix):
                x0, y0, x1, y1 = boxes_px[int(rng.integers(0, len(boxes_px)))]
                x = (x0 + x1) / 2 + rng.normal(0, max(2.0, (x1 - x0) / 6))
                y = (y0 + y1) / 2 + rng.normal(0, max(2.0, (y1 - y0) / 6))
                duration = float(rng.integers(120, 400))
                records.append((x, y, t_ms, duration))
                t_ms += duration + float(rng.integers(20, 80))
            # occasional tracker overshoot past the right edge
            if rng.random() < 0.25:
                x, y, t, d = records[-1]
                records[-1] = (width + 4.0, y, t, d)
            scanpaths.append(
                validate_scanpath(
                    records, (width, height), image_id=image_id, viewer_id=f"v{viewer_idx:02d}"
                )
            )
        write_scanpath_csv(scanpaths, out_dir / "scanpaths" / f"{image_id}.csv", (width, height))

        entries.append(
            {
                "image_id": image_id,
                "image_path": f"images/{image_id}.png",
                "gui_type": gui_type.value,
                "scanpath_paths": [f"scanpaths/{image_id}.csv"],
                "element_box_path": f"boxes/{image_id}.json",
                "partition": "train" if index % 4 else "test",
                "screen_size": [width, height],
            }
        )

    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps({"entries": entries}, indent=1), encoding="utf-8")
    return manifest_path
