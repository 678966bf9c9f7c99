"""Command-line interface.

Subcommands: ``saliency`` (compute or ingest a density map), ``rollout``
(generate a scanpath from a map), ``eval`` (score a prediction against
ground truth), ``sweep`` (run a design-parameter sweep over a manifest),
``analyze visits`` (element visit/revisit ratios), and ``fixture``
(generate the bundled synthetic dataset).

A JSON config file passed with ``--config`` supplies defaults for any long
flag (dashes become underscores); explicit flags win. Exit codes: 0 on
success, 1 on validation errors, 2 when a sweep finished with per-image
failures recorded in the diagnostics.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import map_fixations_to_elements, visit_revisit
from .dataset import (
    generate_fixture_dataset,
    load_element_boxes,
    load_entry_scanpaths,
    load_manifest,
    read_scanpath_csv,
    write_scanpath_csv,
)
from .generate import rollout
from .metrics import MetricReport, RecurrenceConfig, compare
from .saliency import (
    itti_koch_saliency,
    load_density_map,
    load_image,
    resize,
    save_density_map,
)
from .sweep import (
    AXES,
    FileDensityBackend,
    IttiKochBackend,
    SweepGrid,
    emit,
    run_sweep,
)
from .types import DecayKind, ElementCategory, GuiType, ParseError, RolloutConfig, ValidationError


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scanpathkit",
        description="Generate and evaluate saliency-driven scanpaths for GUI screenshots.",
    )
    parser.add_argument("--version", action="version", version=f"scanpathkit {__version__}")
    parser.add_argument(
        "--config", type=Path, default=None,
        help="JSON file of default flag values (long names, dashes as underscores)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("saliency", help="compute or ingest a saliency map for one image")
    p.add_argument("image", type=Path, help="input screenshot (PNG/JPEG)")
    p.add_argument("--backend", choices=["ittikoch", "file"], default="ittikoch")
    p.add_argument("--density", type=Path, default=None,
                   help="density-map file to ingest (required for --backend file)")
    p.add_argument("--side", type=int, default=225, help="square resize target in px")
    p.add_argument("--width", type=int, default=None, help="override resize width")
    p.add_argument("--height", type=int, default=None, help="override resize height")
    p.add_argument("--allow-resize", action="store_true",
                   help="rescale an ingested density map to the target size")
    p.add_argument("--out", type=Path, required=True,
                   help="output map (.txt grid or 16-bit .png)")

    p = sub.add_parser("rollout", help="generate a scanpath from a density map")
    p.add_argument("map", type=Path, help="density-map file (.txt grid or 16-bit .png)")
    p.add_argument("--n", type=int, default=10, help="number of fixations")
    p.add_argument("--decay", choices=["linear", "gamma"], default="gamma")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--radius", type=float, default=0.1, help="masking radius fraction")
    p.add_argument("--side", type=int, default=225,
                   help="image side the radius fraction refers to")
    p.add_argument("--out", type=Path, default=None, help="scanpath CSV (default: stdout)")

    p = sub.add_parser("eval", help="score a predicted scanpath against ground truth")
    p.add_argument("pred", type=Path, help="predicted scanpath CSV")
    p.add_argument("truth", type=Path, nargs="+", help="ground-truth scanpath CSVs")
    p.add_argument("--rho", type=float, default=0.1, help="recurrence threshold")
    p.add_argument("--min-line", type=int, default=2, help="minimum run length L")
    p.add_argument("--coord-scale", type=float, default=1.0,
                   help="multiplier for distance metrics (1.0 = unit square)")

    p = sub.add_parser("sweep", help="run a one-axis design-parameter sweep")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--backend", choices=["ittikoch", "file"], default="ittikoch")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--reduction", choices=["mean", "min"], default="mean",
                   help="how to reduce metrics over viewers per image")
    p.add_argument("--rho", type=float, default=0.1)
    p.add_argument("--min-line", type=int, default=2)
    p.add_argument("--coord-scale", type=float, default=None,
                   help="distance-metric multiplier (default: image_side/100)")
    p.add_argument("--sizes", type=_int_list, default=None, help="e.g. 128,225,512")
    p.add_argument("--widths", type=_int_list, default=None, help="aspect-axis widths")
    p.add_argument("--gammas", type=_float_list, default=None)
    p.add_argument("--radii", type=_float_list, default=None)
    p.add_argument("--fixation-counts", type=_int_list, default=None)

    p = sub.add_parser("analyze", help="dataset analyses")
    analyze_sub = p.add_subparsers(dest="analysis", required=True)
    p = analyze_sub.add_parser("visits", help="element visit/revisit ratios")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--boxes", action="store_true",
                   help="require element boxes on every entry (default: skip entries without)")
    p.add_argument("--source", choices=["truth", "model"], default="truth",
                   help="analyze ground-truth scanpaths or model predictions")
    p.add_argument("--side", type=int, default=225,
                   help="model resize side (with --source model)")
    p.add_argument("--out", type=Path, default=None, help="CSV output (default: stdout)")

    p = sub.add_parser("fixture", help="generate the bundled synthetic dataset")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--images", type=int, default=12)
    p.add_argument("--seed", type=int, default=7)

    return parser


def _apply_config_defaults(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Read --config JSON and fold its values in as parser defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ValidationError("--config needs a file argument")
    config_path = Path(argv[idx + 1])
    try:
        payload = json.loads(config_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read config {config_path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ParseError(f"{config_path}: config must be a JSON object of flag values")
    defaults = {}
    for key, value in payload.items():
        dest = key.replace("-", "_")
        if isinstance(value, list):
            value = tuple(value)
        defaults[dest] = value
    parser.set_defaults(**defaults)
    # also push defaults into subparsers so subcommand flags pick them up
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub_parser in action.choices.values():
                known = {a.dest for a in sub_parser._actions}
                sub_parser.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    return argv


def _cmd_saliency(args) -> int:
    target_w = args.width or args.side
    target_h = args.height or args.side
    img = resize(load_image(args.image), target_w, target_h)
    if args.backend == "ittikoch":
        saliency = itti_koch_saliency(img)
    else:
        if args.density is None:
            raise ValidationError("--backend file requires --density PATH")
        saliency = load_density_map(
            args.density, target_w, target_h, allow_resize=args.allow_resize
        )
    save_density_map(saliency.values, args.out)
    print(f"wrote {args.out} ({saliency.width}x{saliency.height})")
    return 0


def _cmd_rollout(args) -> int:
    saliency = load_density_map(args.map)
    cfg = RolloutConfig(
        n_fixations=args.n,
        decay=DecayKind.parse(args.decay),
        gamma=args.gamma,
        mask_radius_frac=args.radius,
        image_side=args.side,
    )
    scanpath = rollout(saliency, cfg)
    dims = (saliency.width, saliency.height)
    if args.out is not None:
        write_scanpath_csv([scanpath], args.out, dims)
        print(f"wrote {args.out} ({len(scanpath)} fixations)")
    else:
        width, height = dims
        print(f"# screen {width} {height}")
        print(",".join(["viewer_id", "idx", "x_px", "y_px", "t_ms", "duration_ms"]))
        for idx, fx in enumerate(scanpath.fixations):
            print(f"model,{idx},{fx.x * width!r},{fx.y * height!r},,")
    return 0


def _cmd_eval(args) -> int:
    rec_cfg = RecurrenceConfig(rho=args.rho, min_line_len=args.min_line)
    preds = read_scanpath_csv(args.pred)
    if len(preds) != 1:
        raise ValidationError(f"{args.pred}: expected exactly one viewer, found {len(preds)}")
    pred = preds[0]
    truths = [sp for p in args.truth for sp in read_scanpath_csv(p)]
    reports = [compare(pred, t, rec_cfg, coord_scale=args.coord_scale) for t in truths]
    payload = {
        "n_truth_scanpaths": len(truths),
        "rho": args.rho,
        "min_line_len": args.min_line,
        "coord_scale": args.coord_scale,
        "clamped_points": sum(t.clamp_count for t in truths) + pred.clamp_count,
        "mean": {
            name: float(np.mean([getattr(r, name) for r in reports]))
            for name in MetricReport.METRIC_NAMES
        },
        "per_truth": [
            {"viewer_id": t.viewer_id, **r.as_dict()} for t, r in zip(truths, reports)
        ],
    }
    print(json.dumps(payload, indent=1, sort_keys=True))
    return 0


def _cmd_sweep(args) -> int:
    manifest = load_manifest(args.manifest)
    grid_kwargs = {}
    if args.sizes:
        grid_kwargs["image_sides"] = args.sizes
    if args.widths:
        grid_kwargs["widths_for_aspect_study"] = args.widths
    if args.gammas:
        grid_kwargs["gammas"] = args.gammas
    if args.radii:
        grid_kwargs["radii"] = args.radii
    if args.fixation_counts:
        grid_kwargs["fixation_counts"] = args.fixation_counts
    grid = SweepGrid(**grid_kwargs)
    backend = IttiKochBackend() if args.backend == "ittikoch" else FileDensityBackend()
    result = run_sweep(
        manifest,
        grid=grid,
        axis=args.axis,
        backend=backend,
        rec_cfg=RecurrenceConfig(rho=args.rho, min_line_len=args.min_line),
        reduction=args.reduction,
        coord_scale=args.coord_scale,
        workers=args.workers,
    )
    written = emit(result, args.format, args.out)
    for file_path in written:
        print(f"wrote {file_path}")
    failures = [d for d in result.diagnostics if d["status"] == "failed"]
    if failures:
        print(f"{len(failures)} image/config failures; see run_metadata.json", file=sys.stderr)
        return 2
    return 0


def _cmd_analyze_visits(args) -> int:
    manifest = load_manifest(args.manifest)
    totals: dict[tuple[str, str], dict[str, int]] = {}

    def bump(gui: str, category: str, stats) -> None:
        cell = totals.setdefault(
            (gui, category),
            {"visited": 0, "revisited": 0, "elements": 0, "scanpaths": 0},
        )
        cell["visited"] += stats.visited_count
        cell["revisited"] += stats.revisited_count

    skipped = 0
    for entry in manifest.entries:
        if entry.element_box_path is None:
            if args.boxes:
                raise ValidationError(f"entry {entry.image_id!r} has no element_box_path")
            skipped += 1
            continue
        boxes = load_element_boxes(entry.element_box_path)
        if args.source == "truth":
            scanpaths = load_entry_scanpaths(entry, manifest.max_fixations)
        else:
            img = resize(load_image(entry.image_path), args.side, args.side)
            scanpaths = [rollout(itti_koch_saliency(img), RolloutConfig(image_side=args.side))]
        n_per_cat = {
            cat.value: sum(1 for b in boxes if b.category is cat) for cat in ElementCategory
        }
        for sp in scanpaths:
            stats = visit_revisit(map_fixations_to_elements(sp, boxes), boxes)
            for cat, cat_stats in stats.by_category.items():
                for gui in ("all", entry.gui_type.value):
                    bump(gui, cat.value, cat_stats)
                    totals[(gui, cat.value)]["elements"] += n_per_cat[cat.value]
                    totals[(gui, cat.value)]["scanpaths"] += 1

    lines = ["gui_type,category,visited,revisited,elements,visited_ratio,revisited_ratio"]
    gui_order = ["all"] + [g.value for g in GuiType]
    for gui in gui_order:
        for category in [c.value for c in ElementCategory]:
            cell = totals.get((gui, category))
            if cell is None:
                continue
            n_elem = cell["elements"]
            visited_ratio = cell["visited"] / n_elem if n_elem else 0.0
            revisited_ratio = cell["revisited"] / n_elem if n_elem else 0.0
            lines.append(
                f"{gui},{category},{cell['visited']},{cell['revisited']},"
                f"{n_elem},{visited_ratio!r},{revisited_ratio!r}"
            )
    output = "\n".join(lines) + "\n"
    if args.out is not None:
        Path(args.out).write_text(output, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(output, end="")
    if skipped:
        print(f"skipped {skipped} entries without element boxes", file=sys.stderr)
    return 0


def _cmd_fixture(args) -> int:
    manifest_path = generate_fixture_dataset(args.out, n_images=args.images, seed=args.seed)
    print(f"wrote {manifest_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config_defaults(parser, argv)
        args = parser.parse_args(argv)
        if args.command == "saliency":
            return _cmd_saliency(args)
        if args.command == "rollout":
            return _cmd_rollout(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "analyze":
            return _cmd_analyze_visits(args)
        if args.command == "fixture":
            return _cmd_fixture(args)
        raise ValidationError(f"unknown command {args.command!r}")  # pragma: no cover
    except (ValidationError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
