"""Deterministic, provenance-tracked image and label augmentation."""
from .geometric import (
    DEFAULT_FILL,
    DEFAULT_MIN_VISIBILITY,
    affine_matrices,
    apply_geometric,
    transform_norm_bbox,
)
from .ops import (
    OP_REGISTRY,
    Brightness,
    Contrast,
    GaussianBlur,
    GaussianNoise,
    HFlip,
    HueShift,
    Rotate,
    Saturation,
    ScaleTranslate,
    Shear,
    VFlip,
    build_op,
    is_geometric,
    is_photometric,
)
from .photometric import apply_photometric
from .pipeline import (
    PRESETS,
    AugmentPipeline,
    ImageTrace,
    StepSpec,
    StepTrace,
    apply_pipeline,
    augment_dataset,
    derive_seed,
    parse_pipeline_config,
    replay_trace,
)

__all__ = [
    "AugmentPipeline",
    "Brightness",
    "Contrast",
    "DEFAULT_FILL",
    "DEFAULT_MIN_VISIBILITY",
    "GaussianBlur",
    "GaussianNoise",
    "HFlip",
    "HueShift",
    "ImageTrace",
    "OP_REGISTRY",
    "PRESETS",
    "Rotate",
    "Saturation",
    "ScaleTranslate",
    "Shear",
    "StepSpec",
    "StepTrace",
    "VFlip",
    "affine_matrices",
    "apply_geometric",
    "apply_photometric",
    "apply_pipeline",
    "augment_dataset",
    "build_op",
    "derive_seed",
    "is_geometric",
    "is_photometric",
    "parse_pipeline_config",
    "replay_trace",
    "transform_norm_bbox",
]
