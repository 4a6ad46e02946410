"""Dataset-level evaluation: AP sweeps, operating-point metrics, confusion.

Matching is per image. AP uses every prediction regardless of confidence;
the operating-point metrics (precision/recall/F1) and the confusion
matrix first drop predictions under ``conf_threshold`` and then re-match
the survivors, so their counts are not a slice of the AP matching.

The confusion matrix matches class-agnostically (otherwise off-diagonal
cells could never fill) and carries an extra background row/column:
row = true class of an unmatched ground-truth box, column = class of an
unmatched prediction.

Images are independent, so the record list can be processed in chunks by
a worker pool; the reduction is order-fixed and the report is identical
for any worker count.
"""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..annotations import ClassRegistry, ImageRecord
from ..errors import DataError
from ..tables import format_table
from .metrics import PRCurve, average_precision, iou_matrix, match_greedy, pr_from_flags
from .types import EvalConfig, Prediction


@dataclass
class ClassMetrics:
    name: str
    gt_count: int = 0
    pred_count: int = 0
    ap: float = 0.0
    ap_avg: float = 0.0
    tp: int = 0
    fp: int = 0
    fn: int = 0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0


@dataclass
class EvalReport:
    config: EvalConfig
    class_names: tuple[str, ...]
    classes: list[ClassMetrics]
    map_primary: float
    map_avg: float
    precision: float
    recall: float
    f1: float
    confusion: np.ndarray
    curves: list[dict[float, PRCurve]]
    images: int
    seconds: float

    @property
    def seconds_per_image(self) -> float:
        return self.seconds / max(self.images, 1)

    def to_dict(self) -> dict:
        """Full report as plain data. Stable except for the timing fields."""
        labels = list(self.class_names) + ["background"]
        return {
            "config": {
                "iou_thresholds": list(self.config.iou_thresholds),
                "conf_threshold": self.config.conf_threshold,
                "interp_points": self.config.interp_points,
            },
            "images": self.images,
            "seconds": round(self.seconds, 6),
            "seconds_per_image": round(self.seconds_per_image, 9),
            "map": round(self.map_primary, 6),
            "map_avg": round(self.map_avg, 6),
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "f1": round(self.f1, 6),
            "classes": [
                {
                    "name": c.name,
                    "gt": c.gt_count,
                    "predictions": c.pred_count,
                    "ap": round(c.ap, 6),
                    "ap_avg": round(c.ap_avg, 6),
                    "tp": c.tp,
                    "fp": c.fp,
                    "fn": c.fn,
                    "precision": round(c.precision, 6),
                    "recall": round(c.recall, 6),
                    "f1": round(c.f1, 6),
                }
                for c in self.classes
            ],
            "confusion": {"labels": labels, "rows": self.confusion.tolist()},
            "curves": [
                {
                    f"{thr:g}": {
                        "confidence": curve.threshold.tolist(),
                        "recall": curve.recall.tolist(),
                        "precision": curve.precision.tolist(),
                    }
                    for thr, curve in by_thr.items()
                }
                for by_thr in self.curves
            ],
        }

    def render_text(self) -> str:
        primary = self.config.primary_iou
        head = ["class", "gt", "pred", f"ap@{primary:g}", "ap@avg", "prec", "recall", "f1"]
        rows = []
        for c in self.classes:
            rows.append(
                [
                    c.name,
                    str(c.gt_count),
                    str(c.pred_count),
                    f"{c.ap:.4f}",
                    f"{c.ap_avg:.4f}",
                    f"{c.precision:.4f}",
                    f"{c.recall:.4f}",
                    f"{c.f1:.4f}",
                ]
            )
        rows.append(
            [
                "all",
                str(sum(c.gt_count for c in self.classes)),
                str(sum(c.pred_count for c in self.classes)),
                f"{self.map_primary:.4f}",
                f"{self.map_avg:.4f}",
                f"{self.precision:.4f}",
                f"{self.recall:.4f}",
                f"{self.f1:.4f}",
            ]
        )
        out = [format_table(head, rows, align="lrrrrrrr")]

        labels = list(self.class_names) + ["background"]
        chead = ["gt \\ pred"] + labels
        crows = [
            [labels[i]] + [str(int(v)) for v in self.confusion[i]]
            for i in range(len(labels))
        ]
        out.append("")
        out.append(
            f"confusion (conf>={self.config.conf_threshold:g}, iou>={primary:g}):"
        )
        out.append(format_table(chead, crows, align="l" + "r" * len(labels)))
        out.append("")
        out.append(
            f"{self.images} images in {self.seconds:.3f}s "
            f"({self.seconds_per_image * 1000:.2f} ms/image, evaluation wall time)"
        )
        return "\n".join(out)

    def per_class_csv(self) -> str:
        """Per-class summary rows; timing column is evaluation wall time."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        primary = self.config.primary_iou
        writer.writerow(
            ["class", "precision", "recall", f"ap{primary:g}", "ap_avg", "eval_ms_per_image"]
        )
        ms = self.seconds_per_image * 1000.0
        for c in self.classes:
            writer.writerow(
                [c.name, f"{c.precision:.6f}", f"{c.recall:.6f}", f"{c.ap:.6f}",
                 f"{c.ap_avg:.6f}", f"{ms:.3f}"]
            )
        writer.writerow(
            ["all", f"{self.precision:.6f}", f"{self.recall:.6f}",
             f"{self.map_primary:.6f}", f"{self.map_avg:.6f}", f"{ms:.3f}"]
        )
        return buf.getvalue()

    def curve_csv(self, class_id: int, iou_thr: float) -> str:
        curve = self.curves[class_id][iou_thr]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["confidence", "recall", "precision"])
        for conf, rec, prec in zip(curve.threshold, curve.recall, curve.precision):
            writer.writerow([f"{conf:.6f}", f"{rec:.6f}", f"{prec:.6f}"])
        return buf.getvalue()


def emit_report(report: EvalReport, out_dir: Path) -> list[Path]:
    """Write report.json, report.csv, and one PR-curve CSV per class per
    IoU threshold under ``out_dir``; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    json_path = out_dir / "report.json"
    json_path.write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append(json_path)

    csv_path = out_dir / "report.csv"
    csv_path.write_text(report.per_class_csv(), encoding="utf-8")
    written.append(csv_path)

    curve_dir = out_dir / "pr_curves"
    curve_dir.mkdir(exist_ok=True)
    for class_id, name in enumerate(report.class_names):
        for thr in report.config.iou_thresholds:
            path = curve_dir / f"pr_{name}_iou{int(round(thr * 100))}.csv"
            path.write_text(report.curve_csv(class_id, thr), encoding="utf-8")
            written.append(path)
    return written


@dataclass
class _Accum:
    """Mergeable per-chunk accumulation state."""

    sweep: dict[float, list[tuple[list[float], list[bool]]]]
    gt_totals: list[int]
    pred_totals: list[int]
    op_tp: list[int]
    op_fp: list[int]
    confusion: np.ndarray

    @classmethod
    def empty(cls, n_classes: int, thresholds: tuple[float, ...]) -> "_Accum":
        return cls(
            sweep={t: [([], []) for _ in range(n_classes)] for t in thresholds},
            gt_totals=[0] * n_classes,
            pred_totals=[0] * n_classes,
            op_tp=[0] * n_classes,
            op_fp=[0] * n_classes,
            confusion=np.zeros((n_classes + 1, n_classes + 1), dtype=np.int64),
        )

    def merge(self, other: "_Accum") -> None:
        for t, per_class in other.sweep.items():
            for c, (confs, tps) in enumerate(per_class):
                self.sweep[t][c][0].extend(confs)
                self.sweep[t][c][1].extend(tps)
        for c in range(len(self.gt_totals)):
            self.gt_totals[c] += other.gt_totals[c]
            self.pred_totals[c] += other.pred_totals[c]
            self.op_tp[c] += other.op_tp[c]
            self.op_fp[c] += other.op_fp[c]
        self.confusion += other.confusion


def _eval_chunk(args) -> _Accum:
    records, predictions, n_classes, thresholds, conf_thr, primary_iou = args
    acc = _Accum.empty(n_classes, thresholds)
    for record in records:
        preds = predictions.get(record.image_id, [])
        gt_classes = [a.class_id for a in record.annotations]
        gt_boxes = [a.bbox.corners() for a in record.annotations]
        for c in gt_classes:
            acc.gt_totals[c] += 1
        pred_classes = [p.class_id for p in preds]
        pred_confs = [p.confidence for p in preds]
        pred_boxes = [p.bbox.corners() for p in preds]
        for c in pred_classes:
            acc.pred_totals[c] += 1

        overlaps = iou_matrix(pred_boxes, gt_boxes)
        for thr in thresholds:
            assigned = match_greedy(pred_classes, pred_confs, gt_classes, overlaps, thr)
            per_class = acc.sweep[thr]
            for i, c in enumerate(pred_classes):
                per_class[c][0].append(pred_confs[i])
                per_class[c][1].append(i in assigned)

        # Operating point: filter by confidence, then match from scratch.
        keep = [i for i, cf in enumerate(pred_confs) if cf >= conf_thr]
        f_classes = [pred_classes[i] for i in keep]
        f_confs = [pred_confs[i] for i in keep]
        f_overlaps = (
            overlaps[keep, :] if keep else np.zeros((0, len(gt_boxes)))
        )
        assigned = match_greedy(f_classes, f_confs, gt_classes, f_overlaps, primary_iou)
        for i, c in enumerate(f_classes):
            if i in assigned:
                acc.op_tp[c] += 1
            else:
                acc.op_fp[c] += 1

        agn = match_greedy(
            f_classes, f_confs, gt_classes, f_overlaps, primary_iou,
            class_agnostic=True,
        )
        matched_gt = set(agn.values())
        for i, c in enumerate(f_classes):
            if i in agn:
                acc.confusion[gt_classes[agn[i]], c] += 1
            else:
                acc.confusion[n_classes, c] += 1
        for j, c in enumerate(gt_classes):
            if j not in matched_gt:
                acc.confusion[c, n_classes] += 1
    return acc


def evaluate(
    records: list[ImageRecord],
    predictions: dict[str, list[Prediction]],
    registry: ClassRegistry,
    config: EvalConfig | None = None,
    *,
    workers: int = 1,
) -> EvalReport:
    """Score predictions against ground truth.

    ``predictions`` maps image id to detections; ids must be a subset of
    the record ids (an absent id means no detections). Aggregates are
    unweighted class means; a class with no ground truth contributes 0.
    The report does not depend on ``workers``.
    """
    config = config or EvalConfig()
    known = {r.image_id for r in records}
    stray = sorted(set(predictions) - known)
    if stray:
        raise DataError(f"predictions for unknown image(s): {', '.join(stray[:5])}")
    for image_id, preds in predictions.items():
        for p in preds:
            if p.class_id not in registry:
                raise DataError(
                    f"{image_id}: prediction class id {p.class_id} not in registry"
                )

    n_classes = len(registry)
    thresholds = config.iou_thresholds

    t0 = time.perf_counter()
    if workers <= 1 or len(records) < 2:
        acc = _eval_chunk(
            (records, predictions, n_classes, thresholds,
             config.conf_threshold, config.primary_iou)
        )
    else:
        n_chunks = min(workers, len(records))
        bounds = np.linspace(0, len(records), n_chunks + 1).astype(int)
        jobs = []
        for k in range(n_chunks):
            chunk = records[bounds[k] : bounds[k + 1]]
            sub = {r.image_id: predictions[r.image_id] for r in chunk if r.image_id in predictions}
            jobs.append(
                (chunk, sub, n_classes, thresholds,
                 config.conf_threshold, config.primary_iou)
            )
        acc = _Accum.empty(n_classes, thresholds)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_eval_chunk, jobs):
                acc.merge(part)

    curves: list[dict[float, PRCurve]] = []
    classes = []
    for c in range(n_classes):
        by_thr = {
            t: pr_from_flags(
                np.array(acc.sweep[t][c][0]),
                np.array(acc.sweep[t][c][1]),
                acc.gt_totals[c],
            )
            for t in thresholds
        }
        curves.append(by_thr)
        m = ClassMetrics(name=registry.name_for(c))
        m.gt_count = acc.gt_totals[c]
        m.pred_count = acc.pred_totals[c]
        m.ap = average_precision(by_thr[config.primary_iou], config.interp_points)
        m.ap_avg = float(
            np.mean([average_precision(by_thr[t], config.interp_points) for t in thresholds])
        )
        m.tp, m.fp = acc.op_tp[c], acc.op_fp[c]
        m.fn = m.gt_count - m.tp
        m.precision = m.tp / (m.tp + m.fp) if (m.tp + m.fp) else 0.0
        m.recall = m.tp / m.gt_count if m.gt_count else 0.0
        m.f1 = (
            2.0 * m.precision * m.recall / (m.precision + m.recall)
            if (m.precision + m.recall)
            else 0.0
        )
        classes.append(m)
    seconds = time.perf_counter() - t0

    return EvalReport(
        config=config,
        class_names=registry.names,
        classes=classes,
        map_primary=float(np.mean([m.ap for m in classes])),
        map_avg=float(np.mean([m.ap_avg for m in classes])),
        precision=float(np.mean([m.precision for m in classes])),
        recall=float(np.mean([m.recall for m in classes])),
        f1=float(np.mean([m.f1 for m in classes])),
        confusion=acc.confusion,
        curves=curves,
        images=len(records),
        seconds=seconds,
    )
