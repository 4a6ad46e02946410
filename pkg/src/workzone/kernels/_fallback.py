"""Numpy implementations of the raster kernels.

These are the reference semantics. The compiled backend in _core.pyx
reproduces every routine bit for bit: float64 arithmetic with the same
expression structure and the same accumulation order, rounding as
floor(x + 0.5), clamp to [0, 255]. Keep the two files in lockstep.
"""
import numpy as np

from .._imaging_math import hsv_to_rgb_arrays, rgb_to_hsv_arrays
from ._common import gaussian_kernel1d

BACKEND_NAME = "fallback"


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with replicate-edge borders."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return img.copy()
    k = gaussian_kernel1d(sigma)
    r = (k.size - 1) // 2
    h, w = img.shape[:2]
    src = img.astype(np.float64)

    padded = np.pad(src, ((0, 0), (r, r), (0, 0)), mode="edge")
    tmp = np.zeros_like(src)
    for i in range(k.size):  # accumulate in tap order
        tmp += k[i] * padded[:, i : i + w, :]

    padded = np.pad(tmp, ((r, r), (0, 0), (0, 0)), mode="edge")
    out = np.zeros_like(src)
    for i in range(k.size):
        out += k[i] * padded[i : i + h, :, :]

    return np.clip(np.floor(out + 0.5), 0.0, 255.0).astype(np.uint8)


def warp_affine(img: np.ndarray, inv: np.ndarray, fill) -> np.ndarray:
    """Bilinear resample through an inverse pixel-space affine.

    `inv` maps output pixel centers to source positions; samples that
    fall outside the source contribute the constant fill color.
    """
    h, w = img.shape[:2]
    src = img.astype(np.float64)
    xc = np.arange(w, dtype=np.float64) + 0.5
    yc = (np.arange(h, dtype=np.float64) + 0.5)[:, None]
    sx = inv[0, 0] * xc + inv[0, 1] * yc + inv[0, 2] - 0.5
    sy = inv[1, 0] * xc + inv[1, 1] * yc + inv[1, 2] - 0.5

    x0f = np.floor(sx)
    y0f = np.floor(sy)
    fx = sx - x0f
    fy = sy - y0f
    x0 = x0f.astype(np.int64)
    y0 = y0f.astype(np.int64)

    out = np.empty((h, w, 3), dtype=np.uint8)
    for c in range(3):
        chan = src[:, :, c]
        fill_c = float(fill[c])

        def sample(xi, yi):
            valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            xs = np.clip(xi, 0, w - 1)
            ys = np.clip(yi, 0, h - 1)
            return np.where(valid, chan[ys, xs], fill_c)

        p00 = sample(x0, y0)
        p01 = sample(x0 + 1, y0)
        p10 = sample(x0, y0 + 1)
        p11 = sample(x0 + 1, y0 + 1)
        top = (1.0 - fx) * p00 + fx * p01
        bot = (1.0 - fx) * p10 + fx * p11
        val = (1.0 - fy) * top + fy * bot
        out[:, :, c] = np.clip(np.floor(val + 0.5), 0.0, 255.0).astype(np.uint8)
    return out


def hsv_adjust(img: np.ndarray, sat_scale: float, hue_shift: float) -> np.ndarray:
    """Scale saturation (clamped to 1) and shift hue (mod 360)."""
    h, s, v = rgb_to_hsv_arrays(img)
    s = s * sat_scale
    s = np.where(s > 1.0, 1.0, s)
    h = h + hue_shift
    h = np.mod(h, 360.0)
    return hsv_to_rgb_arrays(h, s, v)
