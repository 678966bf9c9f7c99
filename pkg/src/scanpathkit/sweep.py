"""Parameter-sweep engine: run saliency -> rollout -> metrics over a dataset.

Each sweep varies exactly one design axis while every other parameter stays
pinned at its default, so the emitted tables isolate the influence of that
axis. Work items (one per image and configuration) are independent; results
are keyed by image id and canonically sorted before aggregation, so serial
and parallel runs emit byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .analysis import PairedTestResult, mean_sd, paired_t_test
from .dataset import DatasetManifest, ManifestEntry, load_entry_scanpaths
from .generate import rollout
from .metrics import MetricReport, RecurrenceConfig, compare
from .saliency import GuiImage, itti_koch_saliency, load_density_map, load_image, resize
from .types import DecayKind, GuiType, RolloutConfig, SaliencyMap, ValidationError

AXES = ("size", "aspect", "gamma", "radius", "nfix", "ior_compare")

METRIC_ORDER = MetricReport.METRIC_NAMES
_GUI_ORDER = ["all"] + [g.value for g in GuiType]


@dataclass(frozen=True)
class SweepGrid:
    """Value lists for each sweep axis; non-axis values stay at defaults."""

    image_sides: tuple[int, ...] = (128, 225, 512)
    widths_for_aspect_study: tuple[int, ...] = (128, 225, 512)
    gammas: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9)
    radii: tuple[float, ...] = (0.05, 0.1, 0.2, 0.3, 0.5)
    fixation_counts: tuple[int, ...] = (5, 6, 7, 8, 9, 10)
    decay_kinds: tuple[DecayKind, ...] = (
        DecayKind.BASELINE_LINEAR,
        DecayKind.EXPONENTIAL_GAMMA,
    )

    def __post_init__(self) -> None:
        for name in (
            "image_sides",
            "widths_for_aspect_study",
            "gammas",
            "radii",
            "fixation_counts",
            "decay_kinds",
        ):
            if not getattr(self, name):
                raise ValidationError(f"sweep grid list {name} is empty")
        if any(not 0 < g < 1 for g in self.gammas):
            raise ValidationError("gammas must lie in (0,1)")
        if any(not 0 < r < 1 for r in self.radii):
            raise ValidationError("radii must lie in (0,1)")
        if any(n < 1 for n in self.fixation_counts):
            raise ValidationError("fixation_counts must be positive")
        if any(s < 8 for s in (*self.image_sides, *self.widths_for_aspect_study)):
            raise ValidationError("image sizes below 8 px are not supported")


class IttiKochBackend:
    """Computes saliency from the resized screenshot itself."""

    name = "ittikoch"

    def saliency_for(self, entry: ManifestEntry, img: GuiImage) -> SaliencyMap:
        return itti_koch_saliency(img)


class FileDensityBackend:
    """Loads a per-image density map referenced by the manifest entry."""

    name = "file"

    def __init__(self, allow_resize: bool = True):
        self.allow_resize = allow_resize

    def saliency_for(self, entry: ManifestEntry, img: GuiImage) -> SaliencyMap:
        if entry.density_path is None:
            raise ValidationError(
                f"entry {entry.image_id!r} has no density_path for the file backend"
            )
        return load_density_map(
            entry.density_path, img.width, img.height, allow_resize=self.allow_resize
        )


@dataclass(frozen=True)
class SweepRow:
    config_id: str
    gui_type: str
    metric: str
    mean: float
    sd: float
    n: int


@dataclass(frozen=True)
class ComparisonRow:
    config_a: str
    config_b: str
    metric: str
    test: PairedTestResult


@dataclass
class SweepResult:
    axis: str
    rows: list[SweepRow] = field(default_factory=list)
    comparisons: list[ComparisonRow] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "axis": self.axis,
            "rows": [dataclasses.asdict(r) for r in self.rows],
            "comparisons": [
                {
                    "config_a": c.config_a,
                    "config_b": c.config_b,
                    "metric": c.metric,
                    **dataclasses.asdict(c.test),
                }
                for c in self.comparisons
            ],
            "diagnostics": self.diagnostics,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "SweepResult":
        rows = [SweepRow(**r) for r in payload["rows"]]
        comparisons = []
        for c in payload["comparisons"]:
            fields = {k: v for k, v in c.items() if k not in ("config_a", "config_b", "metric")}
            comparisons.append(
                ComparisonRow(
                    config_a=c["config_a"],
                    config_b=c["config_b"],
                    metric=c["metric"],
                    test=PairedTestResult(**fields),
                )
            )
        return cls(
            axis=payload["axis"],
            rows=rows,
            comparisons=comparisons,
            diagnostics=payload["diagnostics"],
            metadata=payload["metadata"],
        )


def _config_dict(cfg: RolloutConfig, resize_to: tuple[int, int]) -> dict:
    return {
        "n_fixations": cfg.n_fixations,
        "decay": cfg.decay.value,
        "gamma": cfg.gamma,
        "mask_radius_frac": cfg.mask_radius_frac,
        "image_side": cfg.image_side,
        "resize_to": list(resize_to),
    }


def evaluate_config(
    manifest: DatasetManifest,
    cfg: RolloutConfig,
    backend=None,
    rec_cfg: RecurrenceConfig = RecurrenceConfig(),
    config_id: str = "config",
    resize_to: tuple[int, int] | None = None,
    reduction: str = "mean",
    coord_scale: float | None = None,
    workers: int = 1,
) -> tuple[list[SweepRow], dict[str, dict[str, float]], list[dict]]:
    """Run the full pipeline for one configuration over a manifest.

    Per image: resize, saliency, rollout, then compare the prediction
    against every ground-truth scanpath; the per-image metric is reduced
    over viewers (``mean`` or ``min``). Per-image failures are recorded as
    diagnostics without aborting the sweep; a configuration with zero
    successful images raises.

    Returns aggregated rows (per GUI type and overall), the per-image
    metric values keyed by image id, and the diagnostics list.

    ``coord_scale`` defaults to ``image_side / 100`` so distance metrics are
    reported in grid-percent units; pass 1.0 for plain unit-square values.
    """
    backend = backend or IttiKochBackend()
    if reduction not in ("mean", "min"):
        raise ValidationError(f"reduction must be 'mean' or 'min', got {reduction!r}")
    target_w, target_h = resize_to or (cfg.image_side, cfg.image_side)
    scale = coord_scale if coord_scale is not None else cfg.image_side / 100.0

    def run_one(entry: ManifestEntry) -> tuple[str, dict[str, float] | None, str | None]:
        try:
            img = resize(load_image(entry.image_path), target_w, target_h)
            saliency = backend.saliency_for(entry, img)
            predicted = rollout(saliency, cfg)
            truths = load_entry_scanpaths(entry, manifest.max_fixations)
            reports = [compare(predicted, truth, rec_cfg, coord_scale=scale) for truth in truths]
            reduce = min if reduction == "min" else (lambda vals: sum(vals) / len(vals))
            per_metric = {
                name: float(reduce([getattr(r, name) for r in reports]))
                for name in METRIC_ORDER
            }
            return entry.image_id, per_metric, None
        except Exception as exc:  # recorded, not raised: sweeps survive bad entries
            return entry.image_id, None, f"{type(exc).__name__}: {exc}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_one, manifest.entries))
    else:
        outcomes = [run_one(entry) for entry in manifest.entries]

    diagnostics = []
    per_image: dict[str, dict[str, float]] = {}
    gui_of = {entry.image_id: entry.gui_type.value for entry in manifest.entries}
    for image_id, metrics, error in outcomes:
        if metrics is None:
            diagnostics.append(
                {"config_id": config_id, "image_id": image_id, "status": "failed", "detail": error}
            )
        else:
            per_image[image_id] = metrics
            diagnostics.append(
                {"config_id": config_id, "image_id": image_id, "status": "ok", "detail": ""}
            )
    if not per_image:
        raise ValidationError(f"configuration {config_id!r} produced no successful images")

    rows = []
    ordered_ids = sorted(per_image)
    groups: dict[str, list[str]] = {"all": ordered_ids}
    for image_id in ordered_ids:
        groups.setdefault(gui_of[image_id], []).append(image_id)
    for gui_type in _GUI_ORDER:
        if gui_type not in groups:
            continue
        ids = groups[gui_type]
        for metric in METRIC_ORDER:
            mean, sd = mean_sd([per_image[i][metric] for i in ids])
            rows.append(
                SweepRow(
                    config_id=config_id,
                    gui_type=gui_type,
                    metric=metric,
                    mean=mean,
                    sd=sd,
                    n=len(ids),
                )
            )
    return rows, per_image, diagnostics


def run_sweep(
    manifest: DatasetManifest,
    grid: SweepGrid = SweepGrid(),
    axis: str = "gamma",
    backend=None,
    rec_cfg: RecurrenceConfig = RecurrenceConfig(),
    base_cfg: RolloutConfig = RolloutConfig(),
    reduction: str = "mean",
    coord_scale: float | None = None,
    workers: int = 1,
) -> SweepResult:
    """Sweep one design axis, holding every other parameter at its default.

    ``ior_compare`` runs the linear and exponential decays at the optimal
    parameters and attaches a paired t-test with Cohen's d per metric over
    per-image means (images that succeeded under both configurations).
    """
    if axis not in AXES:
        raise ValidationError(f"unknown axis {axis!r}; expected one of {AXES}")
    backend = backend or IttiKochBackend()

    configs: list[tuple[str, RolloutConfig, tuple[int, int]]] = []
    if axis == "size":
        for side in grid.image_sides:
            cfg = dataclasses.replace(base_cfg, image_side=side)
            configs.append((f"size={side}", cfg, (side, side)))
    elif axis == "aspect":
        height = base_cfg.image_side
        for width in grid.widths_for_aspect_study:
            configs.append((f"aspect={width}x{height}", base_cfg, (width, height)))
    elif axis == "gamma":
        for gamma in grid.gammas:
            cfg = dataclasses.replace(
                base_cfg, gamma=gamma, decay=DecayKind.EXPONENTIAL_GAMMA
            )
            configs.append((f"gamma={gamma}", cfg, (cfg.image_side, cfg.image_side)))
    elif axis == "radius":
        for radius in grid.radii:
            cfg = dataclasses.replace(base_cfg, mask_radius_frac=radius)
            configs.append((f"radius={radius}", cfg, (cfg.image_side, cfg.image_side)))
    elif axis == "nfix":
        for count in grid.fixation_counts:
            cfg = dataclasses.replace(base_cfg, n_fixations=count)
            configs.append((f"nfix={count}", cfg, (cfg.image_side, cfg.image_side)))
    else:  # ior_compare
        for kind in grid.decay_kinds:
            cfg = dataclasses.replace(base_cfg, decay=kind)
            configs.append((f"ior={kind.value}", cfg, (cfg.image_side, cfg.image_side)))

    result = SweepResult(axis=axis)
    per_config_images: dict[str, dict[str, dict[str, float]]] = {}
    config_meta = {}
    for config_id, cfg, resize_to in configs:
        rows, per_image, diagnostics = evaluate_config(
            manifest,
            cfg,
            backend=backend,
            rec_cfg=rec_cfg,
            config_id=config_id,
            resize_to=resize_to,
            reduction=reduction,
            coord_scale=coord_scale,
            workers=workers,
        )
        result.rows.extend(rows)
        result.diagnostics.extend(diagnostics)
        per_config_images[config_id] = per_image
        config_meta[config_id] = _config_dict(cfg, resize_to)

    if axis == "ior_compare" and len(configs) >= 2:
        id_a, id_b = configs[0][0], configs[1][0]
        shared = sorted(set(per_config_images[id_a]) & set(per_config_images[id_b]))
        for metric in METRIC_ORDER:
            test = paired_t_test(
                [per_config_images[id_a][img][metric] for img in shared],
                [per_config_images[id_b][img][metric] for img in shared],
            )
            result.comparisons.append(
                ComparisonRow(config_a=id_a, config_b=id_b, metric=metric, test=test)
            )

    result.metadata = {
        "tool": "scanpathkit",
        "version": __version__,
        "axis": axis,
        "configs": config_meta,
        "base_config": _config_dict(base_cfg, (base_cfg.image_side, base_cfg.image_side)),
        "recurrence": {"rho": rec_cfg.rho, "min_line_len": rec_cfg.min_line_len},
        "coord_scale": coord_scale if coord_scale is not None else "image_side/100",
        "viewer_reduction": reduction,
        "backend": getattr(backend, "name", type(backend).__name__),
        "workers": workers,
        "n_entries": len(manifest.entries),
        "determinism": "seed-free; identical inputs and parameters reproduce identical outputs",
    }
    return result


def _format_value(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def emit(result: SweepResult, fmt: str, out_dir: str | Path) -> list[Path]:
    """Write sweep output files; returns the written paths.

    ``rows`` go to ``sweep_rows.(csv|json)`` with the stable column order
    (config, gui_type, metric, mean, sd, n); statistical comparisons, when
    present, to ``sweep_tests.*``; run metadata (parameter values, defaults,
    rho, reduction, diagnostics, version) to ``run_metadata.json``.
    """
    if fmt not in ("csv", "json"):
        raise ValidationError(f"format must be 'csv' or 'json', got {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["config", "gui_type", "metric", "mean", "sd", "n"])
        for row in result.rows:
            writer.writerow(
                [row.config_id, row.gui_type, row.metric,
                 _format_value(row.mean), _format_value(row.sd), row.n]
            )
        rows_path = out_dir / "sweep_rows.csv"
        rows_path.write_text(buffer.getvalue(), encoding="utf-8")
        written.append(rows_path)
        if result.comparisons:
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\n")
            writer.writerow(
                ["config_a", "config_b", "metric", "t", "df", "p", "cohens_d", "n_pairs"]
            )
            for comp in result.comparisons:
                writer.writerow(
                    [
                        comp.config_a,
                        comp.config_b,
                        comp.metric,
                        _format_value(comp.test.t_statistic),
                        comp.test.degrees_of_freedom,
                        _format_value(comp.test.p_value),
                        _format_value(comp.test.cohens_d),
                        comp.test.n_pairs,
                    ]
                )
            tests_path = out_dir / "sweep_tests.csv"
            tests_path.write_text(buffer.getvalue(), encoding="utf-8")
            written.append(tests_path)
    else:
        rows_path = out_dir / "sweep_rows.json"
        rows_path.write_text(
            json.dumps(result.to_json_dict(), indent=1, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        written.append(rows_path)

    meta_path = out_dir / "run_metadata.json"
    meta_path.write_text(
        json.dumps(
            {"metadata": result.metadata, "diagnostics": result.diagnostics},
            indent=1,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    written.append(meta_path)
    return written
