"""Shared pieces both kernel backends import, so weights never diverge."""
import numpy as np


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3*sigma)."""
    if sigma <= 0:
        return np.ones(1, dtype=np.float64)
    radius = int(np.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def invert_affine(fwd: np.ndarray) -> np.ndarray:
    """Invert a 2x3 forward affine; raises on a singular linear part."""
    a, b, c = fwd[0]
    d, e, f = fwd[1]
    det = a * e - b * d
    if det == 0.0:
        raise ValueError("singular affine transform")
    ia, ib = e / det, -b / det
    id_, ie = -d / det, a / det
    return np.array(
        [[ia, ib, -(ia * c + ib * f)], [id_, ie, -(id_ * c + ie * f)]],
        dtype=np.float64,
    )
