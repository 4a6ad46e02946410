"""Detection matching and precision/recall machinery.

Low-level functions work on corner 4-tuples (x0, y0, x1, y1) in any one
consistent coordinate system; IoU is invariant to axis-aligned rescaling,
so normalized and pixel boxes give identical overlaps. Intervals are
half-open, which is what makes unit boxes at (0,0) and (1,1) disjoint and
(0,0,2,2) vs (1,1,3,3) overlap in exactly one pixel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..annotations import Annotation, ImageRecord
from .types import Prediction

Corners = tuple[float, float, float, float]


def iou(a: Corners, b: Corners) -> float:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def iou_matrix(preds: list[Corners], gts: list[Corners]) -> np.ndarray:
    out = np.zeros((len(preds), len(gts)), dtype=np.float64)
    for i, p in enumerate(preds):
        for j, g in enumerate(gts):
            out[i, j] = iou(p, g)
    return out


def match_greedy(
    pred_classes: list[int],
    pred_confs: list[float],
    gt_classes: list[int],
    overlaps: np.ndarray,
    iou_thr: float,
    *,
    class_agnostic: bool = False,
) -> dict[int, int]:
    """Greedy one-to-one assignment, returned as {pred index: gt index}.

    Predictions claim ground truth in descending confidence order, with
    input order breaking confidence ties. Each takes the unclaimed box of
    its own class (any class when ``class_agnostic``) with the highest
    IoU at or above the threshold; equal IoU goes to the lowest ground
    truth index.
    """
    order = sorted(range(len(pred_classes)), key=lambda i: (-pred_confs[i], i))
    taken = [False] * len(gt_classes)
    assigned: dict[int, int] = {}
    for i in order:
        best_j = -1
        best_iou = 0.0
        for j in range(len(gt_classes)):
            if taken[j]:
                continue
            if not class_agnostic and gt_classes[j] != pred_classes[i]:
                continue
            o = overlaps[i, j]
            if o >= iou_thr and o > best_iou:
                best_iou = o
                best_j = j
        if best_j >= 0:
            taken[best_j] = True
            assigned[i] = best_j
    return assigned


def match_detections(
    preds: list[Prediction],
    gts: list[Annotation],
    iou_thr: float,
) -> tuple[list[bool], dict[int, int]]:
    """One image's matching: per-prediction TP flags plus FN count per class.

    Flags are aligned to the input prediction order; the matching itself
    runs in confidence order per ``match_greedy``.
    """
    overlaps = iou_matrix(
        [p.bbox.corners() for p in preds], [g.bbox.corners() for g in gts]
    )
    assigned = match_greedy(
        [p.class_id for p in preds],
        [p.confidence for p in preds],
        [g.class_id for g in gts],
        overlaps,
        iou_thr,
    )
    flags = [i in assigned for i in range(len(preds))]
    fn_by_class: dict[int, int] = {}
    matched_gt = set(assigned.values())
    for j, g in enumerate(gts):
        if j not in matched_gt:
            fn_by_class[g.class_id] = fn_by_class.get(g.class_id, 0) + 1
    return flags, fn_by_class


@dataclass
class PRCurve:
    """Precision/recall at every distinct confidence threshold.

    Points are ordered by descending threshold, i.e. non-decreasing
    recall. Empty arrays mean there were no predictions.
    """

    precision: np.ndarray
    recall: np.ndarray
    threshold: np.ndarray
    gt_count: int


def pr_from_flags(confs: np.ndarray, tp_flags: np.ndarray, gt_count: int) -> PRCurve:
    """Build the curve by sweeping distinct confidences high to low.

    All predictions sharing a confidence enter together, so every point
    reflects the complete set at that threshold.
    """
    confs = np.asarray(confs, dtype=np.float64)
    tp_flags = np.asarray(tp_flags, dtype=bool)
    if confs.size == 0:
        empty = np.zeros(0, dtype=np.float64)
        return PRCurve(empty, empty.copy(), empty.copy(), gt_count)
    order = np.argsort(-confs, kind="stable")
    confs = confs[order]
    tp = tp_flags[order]
    cum_tp = np.cumsum(tp)
    cum_fp = np.cumsum(~tp)
    # Last index of each confidence group.
    last = np.nonzero(np.append(confs[1:] != confs[:-1], True))[0]
    precision = cum_tp[last] / (cum_tp[last] + cum_fp[last])
    if gt_count > 0:
        recall = cum_tp[last] / gt_count
    else:
        recall = np.zeros(last.size, dtype=np.float64)
    return PRCurve(precision, recall, confs[last], gt_count)


def pr_curve(
    records: list[ImageRecord],
    predictions: dict[str, list[Prediction]],
    class_id: int,
    iou_thr: float,
) -> PRCurve:
    """Dataset-level curve for one class at one IoU threshold.

    Matching runs per image over all classes (so cross-class collisions
    behave exactly as in the full report), then the curve keeps only this
    class's predictions.
    """
    confs: list[float] = []
    flags: list[bool] = []
    gt_count = 0
    for record in records:
        preds = predictions.get(record.image_id, [])
        gt_count += sum(1 for a in record.annotations if a.class_id == class_id)
        tp, _ = match_detections(preds, record.annotations, iou_thr)
        for p, flag in zip(preds, tp):
            if p.class_id == class_id:
                confs.append(p.confidence)
                flags.append(flag)
    return pr_from_flags(np.array(confs), np.array(flags), gt_count)


def average_precision(curve: PRCurve, points: int = 101) -> float:
    """Interpolated AP over an even recall grid.

    For each grid recall r, take the best precision among curve points
    whose recall reaches r (0 when none does), and average over the grid.
    """
    if curve.gt_count == 0 or curve.precision.size == 0:
        return 0.0
    grid = np.linspace(0.0, 1.0, points)
    total = 0.0
    for r in grid:
        mask = curve.recall >= r
        total += float(curve.precision[mask].max()) if mask.any() else 0.0
    return total / points
