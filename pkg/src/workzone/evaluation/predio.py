"""Prediction files: like label files with a confidence column.

    <class_id> <confidence> <cx> <cy> <w> <h>

One file per image, matched to its image by stem. A missing file means
no detections; an empty file means the same.
"""
from __future__ import annotations

from pathlib import Path

from ..annotations import ClassRegistry, NormBBox
from ..errors import DataError, LabelError
from .types import Prediction


def parse_predictions(text: str, registry: ClassRegistry) -> list[Prediction]:
    preds = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 6:
            raise LabelError(f"expected 6 fields, got {len(fields)}", line=line_no)
        try:
            class_id = int(fields[0])
        except ValueError:
            raise LabelError(f"non-numeric class id: {fields[0]!r}", line=line_no) from None
        if class_id not in registry:
            raise LabelError(f"class id {class_id} not in registry", line=line_no)
        try:
            numbers = [float(f) for f in fields[1:]]
        except ValueError:
            raise LabelError(f"non-numeric field in: {line!r}", line=line_no) from None
        conf, cx, cy, w, h = numbers
        try:
            preds.append(Prediction(class_id, conf, NormBBox(cx, cy, w, h)))
        except ValueError as exc:
            raise LabelError(str(exc), line=line_no) from None
    return preds


def serialize_predictions(preds: list[Prediction]) -> str:
    lines = []
    for p in preds:
        b = p.bbox
        lines.append(
            f"{p.class_id} {p.confidence:.6f} {b.cx:.6f} {b.cy:.6f} {b.w:.6f} {b.h:.6f}\n"
        )
    return "".join(lines)


def load_predictions_dir(
    pred_dir: Path, registry: ClassRegistry
) -> dict[str, list[Prediction]]:
    pred_dir = Path(pred_dir)
    if not pred_dir.is_dir():
        raise DataError(f"not a directory: {pred_dir}")
    out = {}
    for path in sorted(pred_dir.glob("*.txt")):
        try:
            out[path.stem] = parse_predictions(path.read_text(encoding="utf-8"), registry)
        except LabelError as exc:
            raise LabelError(str(exc), path=path) from None
    return out


def write_predictions_dir(
    pred_dir: Path, predictions: dict[str, list[Prediction]]
) -> None:
    pred_dir = Path(pred_dir)
    pred_dir.mkdir(parents=True, exist_ok=True)
    for stem, preds in predictions.items():
        (pred_dir / f"{stem}.txt").write_text(
            serialize_predictions(preds), encoding="utf-8"
        )
