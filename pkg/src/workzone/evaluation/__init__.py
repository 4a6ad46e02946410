"""Detection evaluation: IoU matching, PR curves, AP, reports."""
from .metrics import (
    PRCurve,
    average_precision,
    iou,
    iou_matrix,
    match_detections,
    match_greedy,
    pr_curve,
    pr_from_flags,
)
from .predio import (
    load_predictions_dir,
    parse_predictions,
    serialize_predictions,
    write_predictions_dir,
)
from .report import ClassMetrics, EvalReport, emit_report, evaluate
from .types import MAP_THRESHOLDS, EvalConfig, Prediction

__all__ = [
    "ClassMetrics",
    "EvalConfig",
    "EvalReport",
    "MAP_THRESHOLDS",
    "PRCurve",
    "Prediction",
    "average_precision",
    "emit_report",
    "evaluate",
    "iou",
    "iou_matrix",
    "load_predictions_dir",
    "match_detections",
    "match_greedy",
    "parse_predictions",
    "pr_curve",
    "pr_from_flags",
    "serialize_predictions",
    "write_predictions_dir",
]
