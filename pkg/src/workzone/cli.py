"""Command-line entry point: one binary, one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage or flag validation, 2 bad input data,
3 I/O failure. Every failure writes a diagnostic naming the offending
input to stderr. Output directories are refused when they already exist
unless --force is passed; inputs are never modified.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .annotations import (
    ClassRegistry,
    dataset_stats,
    filter_records,
    parse_cvat_xml,
    serialize_yolo_label,
)
from .augment.pipeline import PRESETS, augment_dataset, parse_pipeline_config
from .dataset import detect_layout, image_path_for, load_any_dataset, load_flat_dataset
from .errors import DataError
from .evaluation import EvalConfig, emit_report, evaluate, load_predictions_dir
from .seeding import derive_seed
from .splitter import SplitSpec, apply_split
from .synthgen import SceneDistribution, generate_dataset
from .tables import format_table


class _Parser(argparse.ArgumentParser):
    # Usage problems exit 1; argparse's default of 2 is reserved for
    # data errors here.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text}")
    return value


def _registry(args) -> ClassRegistry:
    if getattr(args, "names", None):
        return ClassRegistry(tuple(n.strip() for n in args.names.split(",")))
    return ClassRegistry.default()


def _fresh_dir(path: Path, force: bool) -> Path:
    if path.exists() and not force:
        raise ValueError(f"output directory exists: {path} (pass --force to reuse it)")
    return path


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated ratios: {text!r}")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


def _parse_iou_set(text: str) -> tuple[float, ...]:
    """Either "lo:step:hi" (inclusive sweep) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected lo:step:hi, got {text!r}")
        lo, step, hi = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise ValueError(f"bad IoU sweep: {text!r}")
        n = int((hi - lo) / step + 1e-9) + 1
        return tuple(round(lo + step * k, 6) for k in range(n))
    return tuple(float(p) for p in text.split(","))


def _add_names_flag(p):
    p.add_argument(
        "--names",
        help="comma-separated class names (default: cone,barrier,beacon)",
    )


def _add_force_flag(p):
    p.add_argument(
        "--force", action="store_true", help="write into an existing output directory"
    )


# --- gen -------------------------------------------------------------------


def _cmd_gen(args) -> int:
    out = _fresh_dir(Path(args.out), args.force)
    drift = None
    if args.drift is not None:
        # The drift stream is decoupled from scene sampling so the same
        # scenes appear with and without drift at a given seed.
        drift = dataclasses.replace(
            PRESETS[args.drift], master_seed=derive_seed(args.seed, "drift")
        )
    dist = SceneDistribution(
        min_objects=args.min_objects, max_objects=args.max_objects
    )
    manifest = generate_dataset(
        out,
        args.count,
        master_seed=args.seed,
        width=args.width,
        height=args.height,
        distribution=dist,
        drift=drift,
        drift_name=args.drift,
        image_format=args.format,
        workers=args.workers,
    )
    counts = ", ".join(f"{k}={v}" for k, v in sorted(manifest["objects"].items()))
    print(f"wrote {manifest['images']} images to {out} ({counts})")
    if args.drift:
        print(f"drift preset: {args.drift}")
    return 0


# --- augment ---------------------------------------------------------------


def _cmd_augment(args) -> int:
    in_root = Path(args.input)
    if detect_layout(in_root) != "flat":
        raise DataError(f"{in_root}: augment expects a flat dataset (images/ + labels/)")
    out = _fresh_dir(Path(args.out), args.force)
    if args.config is not None:
        pipeline = parse_pipeline_config(Path(args.config).read_text(encoding="utf-8"))
    else:
        pipeline = PRESETS[args.preset]
    if args.seed is not None:
        pipeline = dataclasses.replace(pipeline, master_seed=args.seed)
    result = augment_dataset(
        in_root / "images",
        in_root / "labels",
        out,
        pipeline,
        registry=_registry(args),
        workers=args.workers,
    )
    print(f"augmented {result['images']} images into {out}")
    print(f"provenance: {result['provenance']}")
    return 0


# --- split -----------------------------------------------------------------


def _cmd_split(args) -> int:
    out = _fresh_dir(Path(args.out), args.force)
    spec = SplitSpec(ratios=_parse_ratios(args.ratios), seed=args.seed)
    report = apply_split(
        Path(args.input), out, spec, _registry(args), dry_run=args.dry_run
    )
    print(report.render_text())
    if args.dry_run:
        print(f"dry run: stem manifests written to {out}")
    return 0


# --- convert ---------------------------------------------------------------


def _cmd_convert(args) -> int:
    registry = _registry(args)
    xml_path = Path(args.xml)
    records = parse_cvat_xml(xml_path.read_text(encoding="utf-8"), registry)
    out = _fresh_dir(Path(args.out), args.force)
    labels_dir = out / "labels"
    labels_dir.mkdir(parents=True, exist_ok=True)
    total = 0
    for record in records:
        (labels_dir / f"{record.image_id}.txt").write_text(
            serialize_yolo_label(record.annotations), encoding="utf-8"
        )
        total += len(record.annotations)
    print(f"converted {len(records)} images ({total} boxes) from {xml_path} to {labels_dir}")
    return 0


# --- filter ----------------------------------------------------------------


def _cmd_filter(args) -> int:
    import shutil

    registry = _registry(args)
    in_root = Path(args.input)
    if detect_layout(in_root) != "flat":
        raise DataError(f"{in_root}: filter expects a flat dataset (images/ + labels/)")
    out = _fresh_dir(Path(args.out), args.force)
    records = load_flat_dataset(in_root, registry)
    kept, removed = filter_records(records, args.max_area_frac)

    partitions = [("kept", [(r, None) for r in kept]), ("removed", removed)]
    for part_name, rows in partitions:
        images_dir = out / part_name / "images"
        labels_dir = out / part_name / "labels"
        images_dir.mkdir(parents=True, exist_ok=True)
        labels_dir.mkdir(parents=True, exist_ok=True)
        for record, _reason in rows:
            src = image_path_for(in_root, None, record.image_id)
            shutil.copyfile(src, images_dir / src.name)
            shutil.copyfile(
                in_root / "labels" / f"{record.image_id}.txt",
                labels_dir / f"{record.image_id}.txt",
            )
    log_path = out / "filter_log.txt"
    log_path.write_text(
        "".join(f"{r.image_id}: {reason}\n" for r, reason in removed),
        encoding="utf-8",
    )
    print(f"kept {len(kept)}, removed {len(removed)} (max box area {args.max_area_frac})")
    print(f"log: {log_path}")
    return 0


# --- stats -----------------------------------------------------------------


def _cmd_stats(args) -> int:
    registry = _registry(args)
    by_split = load_any_dataset(Path(args.root), registry)
    stats = dataset_stats(by_split, registry)

    names = list(registry.names)
    head = ["split", "images"] + names + ["total"]
    rows = []
    for split, info in stats["splits"].items():
        objs = info["objects"]
        rows.append(
            [split, str(info["images"])]
            + [str(objs[n]) for n in names]
            + [str(sum(objs.values()))]
        )
    totals = stats["total_objects"]
    rows.append(
        ["total", str(sum(i["images"] for i in stats["splits"].values()))]
        + [str(totals[n]) for n in names]
        + [str(sum(totals.values()))]
    )
    print(format_table(head, rows, align="l" + "r" * (len(head) - 1)))
    if args.json is not None:
        Path(args.json).write_text(
            json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(f"json: {args.json}")
    return 0


# --- eval ------------------------------------------------------------------


def _cmd_eval(args) -> int:
    registry = _registry(args)
    root = Path(args.root)
    by_split = load_any_dataset(root, registry)

    if args.split == "auto":
        records = by_split["all"] if "all" in by_split else by_split["test"]
    elif args.split == "all":
        records = [r for split in by_split.values() for r in split]
    else:
        if args.split not in by_split:
            raise DataError(f"{root}: no {args.split!r} split in a flat dataset")
        records = by_split[args.split]

    predictions = load_predictions_dir(Path(args.predictions), registry)
    config = EvalConfig(
        iou_thresholds=_parse_iou_set(args.iou),
        conf_threshold=args.conf,
        interp_points=args.points,
    )
    report = evaluate(records, predictions, registry, config, workers=args.workers)
    print(report.render_text())
    if args.out is not None:
        out = _fresh_dir(Path(args.out), args.force)
        written = emit_report(report, out)
        print(f"report files: {', '.join(str(p) for p in written)}")
    return 0


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="workzone",
        description="Generate, transform, split, and score construction-zone detection datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen", help="render a synthetic dataset")
    p.add_argument("out", help="output dataset directory")
    p.add_argument("--count", type=int, required=True, help="number of scenes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=_positive_int, default=640)
    p.add_argument("--height", type=_positive_int, default=640)
    p.add_argument("--drift", choices=sorted(PRESETS), help="apply a drift preset")
    p.add_argument("--min-objects", type=int, default=1)
    p.add_argument("--max-objects", type=int, default=4)
    p.add_argument("--format", choices=("png", "ppm"), default="png")
    p.add_argument("--workers", type=_positive_int, default=1)
    _add_force_flag(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("augment", help="apply an augmentation pipeline to a dataset")
    p.add_argument("input", help="flat dataset directory")
    p.add_argument("out", help="output dataset directory")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="pipeline config file")
    group.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, help="override the pipeline master seed")
    _add_names_flag(p)
    p.add_argument("--workers", type=_positive_int, default=1)
    _add_force_flag(p)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("split", help="stratified train/val/test split")
    p.add_argument("input", help="flat dataset directory")
    p.add_argument("out", help="output dataset directory")
    p.add_argument("--ratios", default="0.7,0.2,0.1", help="train,val,test fractions")
    p.add_argument("--seed", type=int, default=0)
    _add_names_flag(p)
    p.add_argument("--dry-run", action="store_true", help="write stem manifests only")
    _add_force_flag(p)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("convert", help="convert CVAT XML annotations to YOLO labels")
    p.add_argument("xml", help="CVAT XML export file")
    p.add_argument("out", help="output directory (labels/ is created inside)")
    _add_names_flag(p)
    _add_force_flag(p)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("filter", help="drop records with oversized or missing boxes")
    p.add_argument("input", help="flat dataset directory")
    p.add_argument("out", help="output directory (kept/ and removed/ inside)")
    p.add_argument(
        "--max-area-frac",
        type=float,
        default=0.8,
        help="remove records with any box above this area fraction",
    )
    _add_names_flag(p)
    _add_force_flag(p)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("stats", help="per-split per-class object counts")
    p.add_argument("root", help="dataset directory (flat or split layout)")
    _add_names_flag(p)
    p.add_argument("--json", help="also write the counts as JSON to this path")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("eval", help="score a predictions directory against ground truth")
    p.add_argument("root", help="ground-truth dataset directory")
    p.add_argument("predictions", help="directory of per-image prediction .txt files")
    p.add_argument(
        "--split",
        default="auto",
        choices=("auto", "train", "val", "test", "all"),
        help="which split to score (auto: flat dataset or its test split)",
    )
    p.add_argument("--conf", type=float, default=0.2, help="operating-point confidence")
    p.add_argument(
        "--iou",
        default="0.50:0.05:0.95",
        help="IoU thresholds, lo:step:hi or comma list (first one is primary)",
    )
    p.add_argument("--points", type=_positive_int, default=101)
    _add_names_flag(p)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", help="write report.json/report.csv/pr_curves/ here")
    _add_force_flag(p)
    p.set_defaults(func=_cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"workzone {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"workzone {args.command}: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"workzone {args.command}: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
