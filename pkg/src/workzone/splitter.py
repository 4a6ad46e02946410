"""Stratified train/val/test splitting with per-class balance reporting.

Records are atomic: a whole image goes to one split. Targets are object
counts (ratio times the total per class), and a seeded shuffle followed
by a greedy assignment chases them: each record lands in the split whose
current counts sit furthest below target, weighted by what the record
would contribute. Records with no objects score every split equally and
therefore fall to the first tie choice, train.
"""
from __future__ import annotations

import json
import random
import shutil
from dataclasses import dataclass
from pathlib import Path

from .annotations import ClassRegistry, ImageRecord
from .dataset import SPLIT_NAMES, image_path_for, load_flat_dataset
from .errors import DataError
from .tables import format_table


@dataclass(frozen=True)
class SplitSpec:
    """(train, val, test) fractions, summing to 1 within 1e-9."""

    ratios: tuple[float, float, float]
    seed: int = 0

    def __post_init__(self):
        if len(self.ratios) != 3:
            raise ValueError(f"need exactly three ratios, got {len(self.ratios)}")
        for r in self.ratios:
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"ratio out of range [0, 1]: {r}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1: {self.ratios}")


@dataclass
class SplitReport:
    """Achieved vs target object counts, per class per split."""

    class_names: tuple[str, ...]
    targets: dict[str, dict[str, float]]
    achieved: dict[str, dict[str, int]]
    images: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "images": dict(self.images),
            "targets": {s: dict(v) for s, v in self.targets.items()},
            "achieved": {s: dict(v) for s, v in self.achieved.items()},
        }

    def render_text(self) -> str:
        head = ["class"] + [f"{s} ({self.images[s]} img)" for s in SPLIT_NAMES]
        rows = []
        for name in self.class_names:
            rows.append(
                [name]
                + [
                    f"{self.achieved[s][name]} (target {self.targets[s][name]:.1f})"
                    for s in SPLIT_NAMES
                ]
            )
        rows.append(
            ["total"]
            + [str(sum(self.achieved[s].values())) for s in SPLIT_NAMES]
        )
        return format_table(head, rows, align="lrrr")


def stratified_split(
    records: list[ImageRecord],
    spec: SplitSpec,
    registry: ClassRegistry,
) -> tuple[list[ImageRecord], list[ImageRecord], list[ImageRecord], SplitReport]:
    """Partition records into (train, val, test) plus a balance report.

    Deterministic for a fixed seed. Output lists preserve the input
    order of ``records``.
    """
    if not records:
        raise DataError("no records to split")

    n_classes = len(registry)
    totals = [0] * n_classes
    vectors: dict[str, list[int]] = {}
    for r in records:
        vec = [0] * n_classes
        for a in r.annotations:
            vec[a.class_id] += 1
            totals[a.class_id] += 1
        vectors[r.image_id] = vec

    targets = {
        s: [spec.ratios[k] * totals[c] for c in range(n_classes)]
        for k, s in enumerate(SPLIT_NAMES)
    }
    current = {s: [0] * n_classes for s in SPLIT_NAMES}

    shuffled = list(records)
    random.Random(spec.seed).shuffle(shuffled)

    assignment: dict[str, str] = {}
    for r in shuffled:
        vec = vectors[r.image_id]
        best_split = SPLIT_NAMES[0]
        best_score = None
        for s in SPLIT_NAMES:
            score = sum(
                vec[c] * (targets[s][c] - current[s][c]) for c in range(n_classes)
            )
            if best_score is None or score > best_score:
                best_score = score
                best_split = s
        assignment[r.image_id] = best_split
        for c in range(n_classes):
            current[best_split][c] += vec[c]

    split_lists = {s: [] for s in SPLIT_NAMES}
    for r in records:
        split_lists[assignment[r.image_id]].append(r)

    report = SplitReport(
        class_names=registry.names,
        targets={
            s: {registry.name_for(c): targets[s][c] for c in range(n_classes)}
            for s in SPLIT_NAMES
        },
        achieved={
            s: {registry.name_for(c): current[s][c] for c in range(n_classes)}
            for s in SPLIT_NAMES
        },
        images={s: len(split_lists[s]) for s in SPLIT_NAMES},
    )
    return split_lists["train"], split_lists["val"], split_lists["test"], report


def apply_split(
    in_root: Path,
    out_root: Path,
    spec: SplitSpec,
    registry: ClassRegistry,
    *,
    dry_run: bool = False,
) -> SplitReport:
    """Split a flat dataset into the standard split layout under out_root.

    Copies files (inputs are never touched). With ``dry_run`` no images
    move; out_root gets three manifest files listing the stems instead.
    Both modes write report.json.
    """
    in_root = Path(in_root)
    out_root = Path(out_root)
    records = load_flat_dataset(in_root, registry)
    train, val, test, report = stratified_split(records, spec, registry)
    by_split = dict(zip(SPLIT_NAMES, (train, val, test)))

    out_root.mkdir(parents=True, exist_ok=True)
    if dry_run:
        for s in SPLIT_NAMES:
            (out_root / f"{s}.txt").write_text(
                "".join(r.image_id + "\n" for r in by_split[s]), encoding="utf-8"
            )
    else:
        for s in SPLIT_NAMES:
            images_out = out_root / "images" / s
            labels_out = out_root / "labels" / s
            images_out.mkdir(parents=True, exist_ok=True)
            labels_out.mkdir(parents=True, exist_ok=True)
            for r in by_split[s]:
                src = image_path_for(in_root, None, r.image_id)
                shutil.copyfile(src, images_out / src.name)
                shutil.copyfile(
                    in_root / "labels" / f"{r.image_id}.txt",
                    labels_out / f"{r.image_id}.txt",
                )
    (out_root / "report.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report
