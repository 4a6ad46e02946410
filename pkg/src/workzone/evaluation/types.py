"""Shared evaluation data types."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..annotations import NormBBox

# Default IoU sweep: 0.50 to 0.95 in steps of 0.05.
MAP_THRESHOLDS = tuple(round(0.50 + 0.05 * k, 2) for k in range(10))


@dataclass(frozen=True)
class Prediction:
    """One detection: class, confidence in [0, 1], normalized box."""

    class_id: int
    confidence: float
    bbox: NormBBox

    def __post_init__(self):
        if not isinstance(self.class_id, int) or self.class_id < 0:
            raise ValueError(f"bad class id: {self.class_id}")
        if not (math.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence out of range [0, 1]: {self.confidence}")


@dataclass(frozen=True)
class EvalConfig:
    """Evaluation knobs.

    The first IoU threshold is the headline one: it feeds the per-class
    AP column and the operating-point precision/recall/F1/confusion.
    ``conf_threshold`` filters predictions for the operating-point
    numbers only; AP sweeps confidence on its own and ignores it.
    """

    iou_thresholds: tuple[float, ...] = MAP_THRESHOLDS
    conf_threshold: float = 0.2
    interp_points: int = 101

    def __post_init__(self):
        if not self.iou_thresholds:
            raise ValueError("need at least one IoU threshold")
        prev = 0.0
        for t in self.iou_thresholds:
            if not prev < t <= 1.0:
                raise ValueError(
                    f"iou_thresholds must be strictly increasing in (0, 1]: "
                    f"{self.iou_thresholds}"
                )
            prev = t
        if not 0.0 <= self.conf_threshold <= 1.0:
            raise ValueError(f"conf_threshold out of range [0, 1]: {self.conf_threshold}")
        if self.interp_points < 2:
            raise ValueError(f"interp_points must be >= 2: {self.interp_points}")

    @property
    def primary_iou(self) -> float:
        return self.iou_thresholds[0]
