"""Pixel-only augmentations.

All integer rounding here is floor(x + 0.5) after float64 math, matching
the kernel backends, so results do not depend on which backend is active.
"""
from __future__ import annotations

import numpy as np

from .. import kernels
from ..imaging import Rgb8Image
from .ops import (
    Brightness,
    Contrast,
    GaussianBlur,
    GaussianNoise,
    HueShift,
    Saturation,
)


def _round_u8(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(arr + 0.5), 0.0, 255.0).astype(np.uint8)


def apply_brightness(img: Rgb8Image, op: Brightness) -> Rgb8Image:
    if op.gain == 1.0:
        return img.copy()
    out = img.pixels.astype(np.float64) * op.gain
    return Rgb8Image(_round_u8(out))


def apply_contrast(img: Rgb8Image, op: Contrast) -> Rgb8Image:
    if op.factor == 1.0:
        return img.copy()
    out = (img.pixels.astype(np.float64) - 128.0) * op.factor + 128.0
    return Rgb8Image(_round_u8(out))


def apply_saturation(img: Rgb8Image, op: Saturation) -> Rgb8Image:
    if op.factor == 1.0:
        return img.copy()
    return Rgb8Image(kernels.hsv_adjust(img.pixels, op.factor, 0.0))


def apply_hue_shift(img: Rgb8Image, op: HueShift) -> Rgb8Image:
    if op.degrees == 0.0:
        return img.copy()
    return Rgb8Image(kernels.hsv_adjust(img.pixels, 1.0, op.degrees))


def apply_gaussian_noise(img: Rgb8Image, op: GaussianNoise) -> Rgb8Image:
    if op.sigma == 0.0:
        return img.copy()
    rng = np.random.Generator(np.random.PCG64(op.seed))
    noise = rng.standard_normal(img.pixels.shape) * op.sigma
    out = img.pixels.astype(np.float64) + noise
    return Rgb8Image(_round_u8(out))


def apply_gaussian_blur(img: Rgb8Image, op: GaussianBlur) -> Rgb8Image:
    if op.sigma == 0.0:
        return img.copy()
    return Rgb8Image(kernels.gaussian_blur(img.pixels, op.sigma))


_DISPATCH = {
    Brightness: apply_brightness,
    Contrast: apply_contrast,
    Saturation: apply_saturation,
    HueShift: apply_hue_shift,
    GaussianNoise: apply_gaussian_noise,
    GaussianBlur: apply_gaussian_blur,
}


def apply_photometric(img: Rgb8Image, op) -> Rgb8Image:
    fn = _DISPATCH.get(type(op))
    if fn is None:
        raise TypeError(f"not a photometric op: {op!r}")
    return fn(img, op)
