"""Dataset folder layouts and loaders.

Two layouts are recognized under a dataset root:

flat                          split
    images/*.png                  images/train/*.png
    labels/*.txt                  images/val/*.png
                                  images/test/*.png
                                  labels/{train,val,test}/*.txt

Generation emits the flat layout; splitting produces the split layout.
Images and label files pair 1:1 by stem, and loaders reject datasets
where either side has an orphan.
"""
from __future__ import annotations

from pathlib import Path

from .annotations import ClassRegistry, ImageRecord, parse_yolo_label
from .errors import DataError, LabelError
from .imaging import image_size

IMAGE_EXTENSIONS = (".png", ".ppm")
SPLIT_NAMES = ("train", "val", "test")


def list_image_files(images_dir: Path) -> list[Path]:
    images_dir = Path(images_dir)
    if not images_dir.is_dir():
        raise DataError(f"not a directory: {images_dir}")
    files = sorted(
        p for p in images_dir.iterdir() if p.is_file() and p.suffix in IMAGE_EXTENSIONS
    )
    stems = [p.stem for p in files]
    if len(set(stems)) != len(stems):
        dupes = sorted({s for s in stems if stems.count(s) > 1})
        raise DataError(f"duplicate image stem(s) in {images_dir}: {', '.join(dupes)}")
    return files


def require_label_files(image_files: list[Path], labels_dir: Path) -> None:
    """Enforce the 1:1 stem pairing between images and label files."""
    labels_dir = Path(labels_dir)
    if not labels_dir.is_dir():
        raise DataError(f"not a directory: {labels_dir}")
    image_stems = {p.stem for p in image_files}
    label_stems = {p.stem for p in labels_dir.iterdir() if p.suffix == ".txt"}
    missing = sorted(image_stems - label_stems)
    if missing:
        raise DataError(f"missing label file(s): {', '.join(missing[:5])}")
    orphans = sorted(label_stems - image_stems)
    if orphans:
        raise DataError(f"label file(s) without an image: {', '.join(orphans[:5])}")


def detect_layout(root: Path) -> str:
    """Return "flat" or "split" for the dataset under ``root``."""
    root = Path(root)
    images = root / "images"
    if not images.is_dir():
        raise DataError(f"no images/ directory under {root}")
    if all((images / s).is_dir() for s in SPLIT_NAMES):
        return "split"
    if any(p.suffix in IMAGE_EXTENSIONS for p in images.iterdir() if p.is_file()):
        return "flat"
    raise DataError(f"{images} has neither image files nor train/val/test subdirectories")


def _load_pairs(
    images_dir: Path, labels_dir: Path, registry: ClassRegistry
) -> list[ImageRecord]:
    files = list_image_files(images_dir)
    require_label_files(files, labels_dir)
    records = []
    for path in files:
        width, height = image_size(path)
        label_path = labels_dir / f"{path.stem}.txt"
        try:
            anns = parse_yolo_label(label_path.read_text(encoding="utf-8"), registry)
        except LabelError as exc:
            raise LabelError(str(exc), path=label_path) from None
        records.append(ImageRecord(path.stem, width, height, anns))
    return records


def load_flat_dataset(root: Path, registry: ClassRegistry) -> list[ImageRecord]:
    root = Path(root)
    return _load_pairs(root / "images", root / "labels", registry)


def load_split_dataset(
    root: Path, registry: ClassRegistry
) -> dict[str, list[ImageRecord]]:
    root = Path(root)
    out = {}
    for split in SPLIT_NAMES:
        out[split] = _load_pairs(root / "images" / split, root / "labels" / split, registry)
    return out


def load_any_dataset(
    root: Path, registry: ClassRegistry
) -> dict[str, list[ImageRecord]]:
    """Load either layout as {split_or_"all": records}."""
    if detect_layout(root) == "split":
        return load_split_dataset(root, registry)
    return {"all": load_flat_dataset(root, registry)}


def image_path_for(root: Path, split: str | None, stem: str) -> Path:
    """Locate the image file for a stem, trying each known extension."""
    base = Path(root) / "images" if split is None else Path(root) / "images" / split
    for ext in IMAGE_EXTENSIONS:
        candidate = base / f"{stem}{ext}"
        if candidate.exists():
            return candidate
    raise DataError(f"no image file for stem {stem!r} under {base}")


__all__ = [
    "IMAGE_EXTENSIONS",
    "SPLIT_NAMES",
    "detect_layout",
    "image_path_for",
    "list_image_files",
    "load_any_dataset",
    "load_flat_dataset",
    "load_split_dataset",
    "require_label_files",
]
