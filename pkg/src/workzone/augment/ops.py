"""Augmentation op types and their parameter bounds.

Photometric ops touch pixels only; geometric ops move pixels and boxes
together. Parameter bounds are enforced at construction so a pipeline
can never carry an op outside its documented range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields


def _check_range(name, value, lo, hi, *, lo_open=False):
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValueError(f"{name} must be a finite number, got {value!r}")
    if lo_open:
        if not lo < value <= hi:
            raise ValueError(f"{name} out of range ({lo}, {hi}]: {value}")
    elif not lo <= value <= hi:
        raise ValueError(f"{name} out of range [{lo}, {hi}]: {value}")


def _check_finite(name, value):
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValueError(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True)
class Brightness:
    """out = clamp(round(in * gain)), per channel."""

    gain: float

    def __post_init__(self):
        _check_range("gain", self.gain, 0.0, 4.0)


@dataclass(frozen=True)
class Contrast:
    """out = clamp(round((in - 128) * factor + 128))."""

    factor: float

    def __post_init__(self):
        _check_range("factor", self.factor, 0.0, 4.0)


@dataclass(frozen=True)
class Saturation:
    """Scale s in HSV space, clamped to 1."""

    factor: float

    def __post_init__(self):
        _check_range("factor", self.factor, 0.0, 4.0)


@dataclass(frozen=True)
class HueShift:
    """h <- (h + degrees) mod 360."""

    degrees: float

    def __post_init__(self):
        _check_finite("degrees", self.degrees)


@dataclass(frozen=True)
class GaussianNoise:
    """Add N(0, sigma) per channel per pixel (0..255 scale), then clamp.

    The draw comes from a PCG64 generator seeded with `seed`, so the
    same (sigma, seed) pair always produces the same field.
    """

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative int, got {self.seed!r}")


@dataclass(frozen=True)
class GaussianBlur:
    """Separable Gaussian, radius ceil(3*sigma), replicate edges."""

    sigma: float

    def __post_init__(self):
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class HFlip:
    pass


@dataclass(frozen=True)
class VFlip:
    pass


@dataclass(frozen=True)
class Rotate:
    """Rotate about the image center; positive angle is counter-clockwise
    on screen (y axis points down)."""

    angle: float

    def __post_init__(self):
        _check_finite("angle", self.angle)


@dataclass(frozen=True)
class Shear:
    """x' = x + kx*(y - cy), y' = y + ky*(x - cx), about the center."""

    kx: float = 0.0
    ky: float = 0.0

    def __post_init__(self):
        _check_range("kx", self.kx, -1.0, 1.0)
        _check_range("ky", self.ky, -1.0, 1.0)


@dataclass(frozen=True)
class ScaleTranslate:
    """Scale about the center, then translate by a frame fraction."""

    sx: float = 1.0
    sy: float = 1.0
    tx: float = 0.0
    ty: float = 0.0

    def __post_init__(self):
        _check_range("sx", self.sx, 0.0, 4.0, lo_open=True)
        _check_range("sy", self.sy, 0.0, 4.0, lo_open=True)
        _check_finite("tx", self.tx)
        _check_finite("ty", self.ty)


PHOTOMETRIC_OPS = (Brightness, Contrast, Saturation, HueShift, GaussianNoise, GaussianBlur)
GEOMETRIC_OPS = (HFlip, VFlip, Rotate, Shear, ScaleTranslate)

OP_REGISTRY = {
    "brightness": Brightness,
    "contrast": Contrast,
    "saturation": Saturation,
    "hue_shift": HueShift,
    "gaussian_noise": GaussianNoise,
    "gaussian_blur": GaussianBlur,
    "hflip": HFlip,
    "vflip": VFlip,
    "rotate": Rotate,
    "shear": Shear,
    "scale_translate": ScaleTranslate,
}

OP_NAMES = {cls: name for name, cls in OP_REGISTRY.items()}


def op_param_names(op_cls) -> list[str]:
    return [f.name for f in fields(op_cls)]


def build_op(name: str, params: dict):
    """Instantiate an op by registry name; bounds checked by the class."""
    if name not in OP_REGISTRY:
        raise ValueError(f"unknown op: {name}")
    cls = OP_REGISTRY[name]
    allowed = set(op_param_names(cls))
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(f"op {name}: unknown parameter(s) {sorted(unknown)}")
    return cls(**params)


def is_photometric(op) -> bool:
    return isinstance(op, PHOTOMETRIC_OPS)


def is_geometric(op) -> bool:
    return isinstance(op, GEOMETRIC_OPS)
