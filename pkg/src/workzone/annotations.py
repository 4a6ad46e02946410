"""Annotation model: classes, boxes, records, and the file formats they ride in.

Label files use the one-line-per-object text format

    <class_id> <cx> <cy> <w> <h>

with normalized center coordinates written at fixed 6-decimal precision.
CVAT XML (the "CVAT for images 1.1" box subset) can be converted into the
same model. Parsers here always return values that satisfy the box
invariants; anything else raises a DataError subclass naming the line.
"""
from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .configfile import nodes_to_map, parse_config_lines
from .errors import ConfigError, CvatError, LabelError

DEFAULT_CLASS_NAMES = ("cone", "barrier", "beacon")


class ClassRegistry:
    """Ordered id -> name map with ids contiguous from 0 and unique names."""

    def __init__(self, names):
        names = list(names)
        if not names:
            raise ValueError("registry needs at least one class")
        if len(set(names)) != len(names):
            raise ValueError("duplicate class name")
        for name in names:
            if not name or not isinstance(name, str):
                raise ValueError(f"bad class name: {name!r}")
        self._names = tuple(names)
        self._ids = {name: i for i, name in enumerate(names)}

    @classmethod
    def default(cls) -> "ClassRegistry":
        return cls(DEFAULT_CLASS_NAMES)

    @classmethod
    def from_id_map(cls, id_map: dict[int, str]) -> "ClassRegistry":
        """Build from an explicit {id: name} map, enforcing contiguity."""
        ids = sorted(id_map)
        if ids != list(range(len(ids))):
            raise ValueError("non-contiguous class ids")
        return cls(id_map[i] for i in ids)

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    def name_for(self, class_id: int) -> str:
        if not 0 <= class_id < len(self._names):
            raise KeyError(f"class id {class_id} not in registry")
        return self._names[class_id]

    def id_for(self, name: str) -> int:
        if name not in self._ids:
            raise KeyError(f"class name {name!r} not in registry")
        return self._ids[name]

    def __len__(self):
        return len(self._names)

    def __contains__(self, class_id):
        return isinstance(class_id, int) and 0 <= class_id < len(self._names)

    def __iter__(self):
        return iter(range(len(self._names)))

    def __eq__(self, other):
        return isinstance(other, ClassRegistry) and other._names == self._names

    def __repr__(self):
        return f"ClassRegistry({list(self._names)!r})"


@dataclass(frozen=True)
class NormBBox:
    """Axis-aligned box in normalized center format.

    cx, cy lie in [0, 1]; w, h in (0, 1]. Given those ranges the part of
    the box inside the unit square always has positive area.
    """

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("cx", "cy"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} out of range: {v}")
        for name in ("w", "h"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} out of range: {v}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def corners(self) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1); may poke outside [0, 1] for edge boxes."""
        return (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )

    def to_pixel(self, width: int, height: int) -> "PixelBBox":
        x0, y0, x1, y1 = self.corners()
        return PixelBBox(x0 * width, y0 * height, x1 * width, y1 * height)


@dataclass(frozen=True)
class PixelBBox:
    """Axis-aligned box in pixel coordinates, half-open on the max edges."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if self.xmin < 0 or self.ymin < 0:
            raise ValueError(f"negative pixel coordinate: {self}")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(f"empty pixel box: {self}")

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    def to_norm(self, width: int, height: int) -> NormBBox:
        return NormBBox(
            (self.xmin + self.xmax) / 2.0 / width,
            (self.ymin + self.ymax) / 2.0 / height,
            (self.xmax - self.xmin) / width,
            (self.ymax - self.ymin) / height,
        )


@dataclass(frozen=True)
class Annotation:
    class_id: int
    bbox: NormBBox

    def __post_init__(self):
        if not isinstance(self.class_id, int) or self.class_id < 0:
            raise ValueError(f"bad class id: {self.class_id}")


@dataclass
class ImageRecord:
    """One image plus its annotations; image_id is the file stem."""

    image_id: str
    width: int
    height: int
    annotations: list[Annotation] = field(default_factory=list)

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("empty image id")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"bad image size {self.width}x{self.height}")

    def class_counts(self, registry: ClassRegistry) -> dict[int, int]:
        counts = {c: 0 for c in registry}
        for ann in self.annotations:
            counts[ann.class_id] += 1
        return counts


@dataclass
class DatasetConfig:
    root: str
    split_paths: dict[str, str]
    registry: ClassRegistry


# --- label text format -------------------------------------------------

def _parse_float(token: str, what: str, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise LabelError(f"non-numeric {what}: {token!r}", line=line_no) from None


def parse_yolo_label(text: str, registry: ClassRegistry) -> list[Annotation]:
    """Parse label text into annotations; blank lines are ignored."""
    annotations = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise LabelError(f"expected 5 fields, got {len(fields)}", line=line_no)
        try:
            class_id = int(fields[0])
        except ValueError:
            raise LabelError(f"non-numeric class id: {fields[0]!r}", line=line_no) from None
        if class_id not in registry:
            raise LabelError(f"class id {class_id} not in registry", line=line_no)
        cx = _parse_float(fields[1], "cx", line_no)
        cy = _parse_float(fields[2], "cy", line_no)
        w = _parse_float(fields[3], "w", line_no)
        h = _parse_float(fields[4], "h", line_no)
        try:
            bbox = NormBBox(cx, cy, w, h)
        except ValueError as exc:
            raise LabelError(str(exc), line=line_no) from None
        annotations.append(Annotation(class_id, bbox))
    return annotations


def serialize_yolo_label(annotations: list[Annotation]) -> str:
    """Serialize to canonical text: 6-decimal coordinates, one line each."""
    lines = []
    for ann in annotations:
        b = ann.bbox
        lines.append(f"{ann.class_id} {b.cx:.6f} {b.cy:.6f} {b.w:.6f} {b.h:.6f}\n")
    return "".join(lines)


# --- dataset config ----------------------------------------------------

def parse_dataset_config(text: str) -> DatasetConfig:
    """Parse the dataset config dialect (path/train/val/test + names map)."""
    top = nodes_to_map(parse_config_lines(text))

    if "path" not in top:
        raise ConfigError("missing key: path")
    for split in ("train", "val", "test"):
        if split not in top:
            raise ConfigError(f"missing split: {split}")
    if "names" not in top:
        raise ConfigError("missing key: names")

    known = {"path", "train", "val", "test", "names"}
    for key, node in top.items():
        if key not in known:
            raise ConfigError(f"unknown key: {key}", line=node.line)

    names_node = top["names"]
    if names_node.value:
        raise ConfigError("names must be an indented id: name map", line=names_node.line)
    id_map: dict[int, str] = {}
    for child in names_node.children:
        try:
            class_id = int(child.key)
        except ValueError:
            raise ConfigError(f"non-integer class id: {child.key!r}", line=child.line) from None
        if class_id in id_map:
            raise ConfigError(f"duplicate class id {class_id}", line=child.line)
        if not child.value:
            raise ConfigError(f"empty name for class {class_id}", line=child.line)
        id_map[class_id] = child.value
    if not id_map:
        raise ConfigError("names map is empty", line=names_node.line)
    ids = sorted(id_map)
    if ids != list(range(len(ids))):
        raise ConfigError("non-contiguous class ids")
    try:
        registry = ClassRegistry(id_map[i] for i in ids)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    for split in ("train", "val", "test"):
        if not top[split].value:
            raise ConfigError(f"empty path for split {split}", line=top[split].line)
    if not top["path"].value:
        raise ConfigError("empty path", line=top["path"].line)

    return DatasetConfig(
        root=top["path"].value,
        split_paths={s: top[s].value for s in ("train", "val", "test")},
        registry=registry,
    )


def serialize_dataset_config(config: DatasetConfig) -> str:
    lines = [f"path: {config.root}"]
    for split in ("train", "val", "test"):
        lines.append(f"{split}: {config.split_paths[split]}")
    lines.append("names:")
    for class_id in config.registry:
        lines.append(f"  {class_id}: {config.registry.name_for(class_id)}")
    return "\n".join(lines) + "\n"


# --- CVAT XML subset ---------------------------------------------------

_CVAT_UNSUPPORTED = ("polygon", "polyline", "points", "mask", "ellipse", "cuboid")


def parse_cvat_xml(text: str, registry: ClassRegistry) -> list[ImageRecord]:
    """Convert CVAT-for-images XML (box shapes only) into records.

    Tracks and non-box shapes are rejected. Box corners are clamped to
    the frame; inverted boxes are fatal.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise CvatError(f"malformed XML: {exc}") from None

    if root.find(".//track") is not None:
        raise CvatError("track elements are not supported (annotate per image)")

    records = []
    for image_el in root.iter("image"):
        name = image_el.get("name")
        if not name:
            raise CvatError("image element without name")
        stem = name.rsplit("/", 1)[-1]
        stem = stem.rsplit(".", 1)[0] if "." in stem else stem
        try:
            width = int(image_el.get("width", ""))
            height = int(image_el.get("height", ""))
        except ValueError:
            raise CvatError(f"image {name!r}: bad width/height") from None
        if width <= 0 or height <= 0:
            raise CvatError(f"image {name!r}: bad size {width}x{height}")

        for tag in _CVAT_UNSUPPORTED:
            if image_el.find(tag) is not None:
                raise CvatError(f"image {name!r}: {tag} shapes are not supported")

        annotations = []
        for box_el in image_el.iter("box"):
            label = box_el.get("label", "")
            try:
                class_id = registry.id_for(label)
            except KeyError:
                raise CvatError(f"image {name!r}: unknown label {label!r}") from None
            try:
                xtl = float(box_el.get("xtl", ""))
                ytl = float(box_el.get("ytl", ""))
                xbr = float(box_el.get("xbr", ""))
                ybr = float(box_el.get("ybr", ""))
            except ValueError:
                raise CvatError(f"image {name!r}: non-numeric box coordinate") from None
            if not (xbr > xtl and ybr > ytl):
                raise CvatError(
                    f"image {name!r}: inverted or empty box "
                    f"({xtl}, {ytl}, {xbr}, {ybr})"
                )
            # tolerate slight out-of-frame export; clamp to the image
            xtl = min(max(xtl, 0.0), width)
            xbr = min(max(xbr, 0.0), width)
            ytl = min(max(ytl, 0.0), height)
            ybr = min(max(ybr, 0.0), height)
            if not (xbr > xtl and ybr > ytl):
                raise CvatError(f"image {name!r}: box entirely outside the frame")
            pixel = PixelBBox(xtl, ytl, xbr, ybr)
            annotations.append(Annotation(class_id, pixel.to_norm(width, height)))

        records.append(ImageRecord(stem, width, height, annotations))
    return records


# --- dataset-level helpers ---------------------------------------------

def dataset_stats(
    records_by_split: dict[str, list[ImageRecord]], registry: ClassRegistry
) -> dict:
    """Per-split per-class object counts plus image counts and totals."""
    splits = {}
    totals = {registry.name_for(c): 0 for c in registry}
    for split, records in records_by_split.items():
        counts = {c: 0 for c in registry}
        for record in records:
            for ann in record.annotations:
                counts[ann.class_id] += 1
        named = {registry.name_for(c): counts[c] for c in registry}
        splits[split] = {"images": len(records), "objects": named}
        for name, n in named.items():
            totals[name] += n
    return {"splits": splits, "total_objects": totals}


def filter_records(
    records: list[ImageRecord], max_area_frac: float
) -> tuple[list[ImageRecord], list[tuple[ImageRecord, str]]]:
    """Split records into (kept, removed-with-reason), order preserved.

    A record is removed when any box covers more than max_area_frac of
    the frame (an obstacle too close to the camera) or when it has no
    boxes at all.
    """
    if not 0.0 < max_area_frac <= 1.0:
        raise ValueError(f"max_area_frac out of range: {max_area_frac}")
    kept, removed = [], []
    for record in records:
        if not record.annotations:
            removed.append((record, "no objects"))
            continue
        big = next(
            (a for a in record.annotations if a.bbox.area > max_area_frac), None
        )
        if big is not None:
            removed.append(
                (record, f"box area {big.bbox.area:.4f} > {max_area_frac}")
            )
        else:
            kept.append(record)
    return kept, removed
