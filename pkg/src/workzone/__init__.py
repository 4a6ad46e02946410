"""Dataset tooling for construction-zone obstacle detection.

Synthetic scene generation, label ingestion and filtering, deterministic
augmentation with provenance, stratified splitting, and a detection
evaluator, all behind one CLI (``workzone``). Submodules group the
stages; the names most code needs are re-exported here.
"""

from .annotations import (
    DEFAULT_CLASS_NAMES,
    Annotation,
    ClassRegistry,
    DatasetConfig,
    ImageRecord,
    NormBBox,
    PixelBBox,
    dataset_stats,
    filter_records,
    parse_cvat_xml,
    parse_dataset_config,
    parse_yolo_label,
    serialize_dataset_config,
    serialize_yolo_label,
)
from .augment import (
    OP_REGISTRY,
    PRESETS,
    AugmentPipeline,
    StepSpec,
    apply_pipeline,
    augment_dataset,
    parse_pipeline_config,
    replay_trace,
)
from .dataset import load_any_dataset, load_flat_dataset, load_split_dataset
from .errors import ConfigError, CvatError, DataError, ImageFormatError, LabelError
from .evaluation import (
    EvalConfig,
    EvalReport,
    Prediction,
    average_precision,
    emit_report,
    evaluate,
    iou,
    load_predictions_dir,
    match_detections,
    pr_curve,
)
from .imaging import Rgb8Image, hsv_to_rgb, load_image, rgb_to_hsv, save_image
from .seeding import derive_seed
from .splitter import SplitSpec, apply_split, stratified_split
from .synthgen import (
    ObstacleSpec,
    SceneDistribution,
    SceneSpec,
    generate_dataset,
    reference_detector,
    render_scene,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CLASS_NAMES",
    "OP_REGISTRY",
    "PRESETS",
    "Annotation",
    "AugmentPipeline",
    "ClassRegistry",
    "ConfigError",
    "CvatError",
    "DataError",
    "DatasetConfig",
    "EvalConfig",
    "EvalReport",
    "ImageFormatError",
    "ImageRecord",
    "LabelError",
    "NormBBox",
    "ObstacleSpec",
    "PixelBBox",
    "Prediction",
    "Rgb8Image",
    "SceneDistribution",
    "SceneSpec",
    "SplitSpec",
    "StepSpec",
    "apply_pipeline",
    "apply_split",
    "augment_dataset",
    "average_precision",
    "dataset_stats",
    "derive_seed",
    "emit_report",
    "evaluate",
    "filter_records",
    "generate_dataset",
    "hsv_to_rgb",
    "iou",
    "load_any_dataset",
    "load_flat_dataset",
    "load_image",
    "load_predictions_dir",
    "load_split_dataset",
    "match_detections",
    "parse_cvat_xml",
    "parse_dataset_config",
    "parse_pipeline_config",
    "parse_yolo_label",
    "pr_curve",
    "reference_detector",
    "render_scene",
    "replay_trace",
    "rgb_to_hsv",
    "save_image",
    "serialize_dataset_config",
    "serialize_yolo_label",
    "stratified_split",
]
