"""Vectorized hexcone HSV conversion, shared by imaging and the kernels.

Float64 throughout; branch trees and expression order here are the
reference semantics that the compiled kernel mirrors, so edits must be
reflected in kernels/_core.pyx.
"""
import numpy as np


def rgb_to_hsv_arrays(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """uint8 (..., 3) -> float64 (h, s, v); h in [0, 360), s and v in [0, 1]."""
    r = pixels[..., 0] / 255.0
    g = pixels[..., 1] / 255.0
    b = pixels[..., 2] / 255.0
    v = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    d = v - mn
    d_safe = np.where(d == 0.0, 1.0, d)
    h_r = 60.0 * ((g - b) / d_safe)
    h_g = 60.0 * ((b - r) / d_safe + 2.0)
    h_b = 60.0 * ((r - g) / d_safe + 4.0)
    h = np.where(d == 0.0, 0.0, np.where(v == r, h_r, np.where(v == g, h_g, h_b)))
    h = np.where(h < 0.0, h + 360.0, h)
    s = np.where(v == 0.0, 0.0, d / np.where(v == 0.0, 1.0, v))
    return h, s, v


def hsv_to_rgb_arrays(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """float64 (h, s, v) with h in [0, 360) -> uint8 (..., 3)."""
    hp = h / 60.0
    sector = np.floor(hp)
    f = hp - sector
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    sector = sector.astype(np.int64) % 6
    r = np.choose(sector, [v, q, p, p, t, v])
    g = np.choose(sector, [t, v, v, q, p, p])
    b = np.choose(sector, [p, p, t, v, v, q])
    out = np.empty(h.shape + (3,), dtype=np.uint8)
    for i, chan in enumerate((r, g, b)):
        out[..., i] = np.clip(np.floor(chan * 255.0 + 0.5), 0.0, 255.0).astype(np.uint8)
    return out
