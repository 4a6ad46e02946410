"""Geometric augmentations: pixels and boxes move together.

Flips are exact array reversals with closed-form box updates. The affine
ops (rotate, shear, scale/translate) warp pixels by inverse bilinear
sampling and carry each box through the same forward map: transform the
four corners, take the axis-aligned hull, clip it to the frame, and drop
the box when the visible fraction falls below ``min_visibility``.

Angles that land on multiples of 90 degrees get their sine/cosine snapped
to exact 0/+-1 so that e.g. two 90-degree rotations compose losslessly.
"""
from __future__ import annotations

import math

import numpy as np

from .. import kernels
from ..annotations import Annotation, NormBBox
from ..imaging import Rgb8Image
from .ops import HFlip, Rotate, ScaleTranslate, Shear, VFlip

DEFAULT_FILL = (114, 114, 114)
DEFAULT_MIN_VISIBILITY = 0.3


def _snapped_cos_sin(angle_deg: float) -> tuple[float, float]:
    r = math.fmod(angle_deg, 360.0)
    if r < 0.0:
        r += 360.0
    if r == 0.0:
        return 1.0, 0.0
    if r == 90.0:
        return 0.0, 1.0
    if r == 180.0:
        return -1.0, 0.0
    if r == 270.0:
        return 0.0, -1.0
    rad = math.radians(angle_deg)
    return math.cos(rad), math.sin(rad)


def affine_matrices(op, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Forward 2x3 maps for one affine op: (pixel space, normalized space).

    Pixel space is continuous with pixel centers at integer+0.5; the pivot
    is the frame center (W/2, H/2). The normalized map is the same
    transform expressed on unit coordinates, which folds the aspect ratio
    into the off-diagonal terms.
    """
    w = float(width)
    h = float(height)
    if isinstance(op, Rotate):
        # y grows downward, positive angle turns content counter-clockwise
        # on screen: (1,0) -> (c,-s), (0,1) -> (s,c).
        c, s = _snapped_cos_sin(op.angle)
        a00, a01, a10, a11 = c, s, -s, c
        n00, n01 = c, s * h / w
        n10, n11 = -s * w / h, c
        ntx = nty = 0.0
    elif isinstance(op, Shear):
        a00, a01, a10, a11 = 1.0, op.kx, op.ky, 1.0
        n00, n01 = 1.0, op.kx * h / w
        n10, n11 = op.ky * w / h, 1.0
        ntx = nty = 0.0
    elif isinstance(op, ScaleTranslate):
        a00, a01, a10, a11 = op.sx, 0.0, 0.0, op.sy
        n00, n01, n10, n11 = op.sx, 0.0, 0.0, op.sy
        ntx, nty = op.tx, op.ty
    else:
        raise TypeError(f"not an affine op: {op!r}")

    cx, cy = w / 2.0, h / 2.0
    pixel = np.array(
        [
            [a00, a01, cx - a00 * cx - a01 * cy + ntx * w],
            [a10, a11, cy - a10 * cx - a11 * cy + nty * h],
        ],
        dtype=np.float64,
    )
    norm = np.array(
        [
            [n00, n01, 0.5 - n00 * 0.5 - n01 * 0.5 + ntx],
            [n10, n11, 0.5 - n10 * 0.5 - n11 * 0.5 + nty],
        ],
        dtype=np.float64,
    )
    return pixel, norm


def map_norm_point(norm_fwd: np.ndarray, u: float, v: float) -> tuple[float, float]:
    m = norm_fwd
    return (
        float(m[0, 0]) * u + float(m[0, 1]) * v + float(m[0, 2]),
        float(m[1, 0]) * u + float(m[1, 1]) * v + float(m[1, 2]),
    )


def transform_norm_bbox(
    box: NormBBox, norm_fwd: np.ndarray, min_visibility: float
) -> NormBBox | None:
    """Corner-map -> hull -> clip -> visibility gate.

    Returns the clipped hull as a new box, or None when the box leaves the
    frame (almost) entirely or keeps less than ``min_visibility`` of its
    transformed hull area inside.
    """
    x0, y0, x1, y1 = box.corners()
    pts = [
        map_norm_point(norm_fwd, x0, y0),
        map_norm_point(norm_fwd, x1, y0),
        map_norm_point(norm_fwd, x1, y1),
        map_norm_point(norm_fwd, x0, y1),
    ]
    hx0 = min(p[0] for p in pts)
    hx1 = max(p[0] for p in pts)
    hy0 = min(p[1] for p in pts)
    hy1 = max(p[1] for p in pts)
    hull_area = (hx1 - hx0) * (hy1 - hy0)
    if hull_area <= 0.0:
        return None
    cx0, cy0 = max(hx0, 0.0), max(hy0, 0.0)
    cx1, cy1 = min(hx1, 1.0), min(hy1, 1.0)
    if cx1 <= cx0 or cy1 <= cy0:
        return None
    if (cx1 - cx0) * (cy1 - cy0) / hull_area < min_visibility:
        return None
    return NormBBox(
        (cx0 + cx1) / 2.0,
        (cy0 + cy1) / 2.0,
        cx1 - cx0,
        cy1 - cy0,
    )


def _flip_annotations_h(anns: list[Annotation]) -> list[Annotation]:
    return [
        Annotation(a.class_id, NormBBox(1.0 - a.bbox.cx, a.bbox.cy, a.bbox.w, a.bbox.h))
        for a in anns
    ]


def _flip_annotations_v(anns: list[Annotation]) -> list[Annotation]:
    return [
        Annotation(a.class_id, NormBBox(a.bbox.cx, 1.0 - a.bbox.cy, a.bbox.w, a.bbox.h))
        for a in anns
    ]


def apply_geometric(
    img: Rgb8Image,
    op,
    anns: list[Annotation],
    *,
    min_visibility: float = DEFAULT_MIN_VISIBILITY,
    fill: tuple[int, int, int] = DEFAULT_FILL,
) -> tuple[Rgb8Image, list[Annotation]]:
    if isinstance(op, HFlip):
        out = np.ascontiguousarray(img.pixels[:, ::-1, :])
        return Rgb8Image(out), _flip_annotations_h(anns)
    if isinstance(op, VFlip):
        out = np.ascontiguousarray(img.pixels[::-1, :, :])
        return Rgb8Image(out), _flip_annotations_v(anns)

    pixel_fwd, norm_fwd = affine_matrices(op, img.width, img.height)
    inv = kernels.invert_affine(pixel_fwd)
    warped = kernels.warp_affine(img.pixels, inv, fill)
    kept = []
    for a in anns:
        new_box = transform_norm_bbox(a.bbox, norm_fwd, min_visibility)
        if new_box is not None:
            kept.append(Annotation(a.class_id, new_box))
    return Rgb8Image(warped), kept
