"""8-bit RGB image container, PNG/PPM I/O, and HSV conversion.

PNG support covers 8-bit RGB and RGBA (alpha dropped on load); other
bit depths and color types are rejected up front by inspecting the
IHDR chunk, before the decoder ever runs. PPM is the binary P6 flavor
with maxval 255. Both paths round-trip RGB content losslessly.

HSV uses the hexcone model: h in [0, 360), s and v in [0, 1]. The
scalar and array converters share the exact same float64 arithmetic,
and converting any 24-bit RGB value out and back recovers it exactly
(the exhaustive sweep lives in the test suite).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from ._imaging_math import hsv_to_rgb_arrays, rgb_to_hsv_arrays
from .errors import ImageFormatError

__all__ = [
    "Rgb8Image",
    "HsvPixel",
    "load_image",
    "save_image",
    "image_size",
    "png_header",
    "rgb_to_hsv",
    "hsv_to_rgb",
    "rgb_to_hsv_arrays",
    "hsv_to_rgb_arrays",
]

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_PNG_COLOR_TYPES = {0: "grayscale", 2: "rgb", 3: "palette", 4: "grayscale+alpha", 6: "rgba"}


@dataclass(frozen=True)
class Rgb8Image:
    """Row-major (height, width, 3) uint8 pixel buffer."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if not isinstance(p, np.ndarray) or p.dtype != np.uint8 or p.ndim != 3 or p.shape[2] != 3:
            raise ValueError("pixels must be a (H, W, 3) uint8 array")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError(f"bad image shape {p.shape}")
        if not p.flags.c_contiguous:
            object.__setattr__(self, "pixels", np.ascontiguousarray(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def new(cls, width: int, height: int, color=(0, 0, 0)) -> "Rgb8Image":
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:, :] = color
        return cls(arr)

    def copy(self) -> "Rgb8Image":
        return Rgb8Image(self.pixels.copy())

    def __eq__(self, other):
        return isinstance(other, Rgb8Image) and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True)
class HsvPixel:
    h: float  # degrees, [0, 360)
    s: float  # [0, 1]
    v: float  # [0, 1]

    def __post_init__(self):
        if not 0.0 <= self.h < 360.0:
            raise ValueError(f"h out of range: {self.h}")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"s out of range: {self.s}")
        if not 0.0 <= self.v <= 1.0:
            raise ValueError(f"v out of range: {self.v}")


# --- PNG ----------------------------------------------------------------

def png_header(path) -> tuple[int, int, int, int]:
    """Read (width, height, bit_depth, color_type) from a PNG's IHDR."""
    with open(path, "rb") as fh:
        head = fh.read(33)
    if len(head) < 33 or head[:8] != _PNG_SIGNATURE:
        raise ImageFormatError(f"{path}: not a PNG file")
    if head[12:16] != b"IHDR":
        raise ImageFormatError(f"{path}: missing IHDR chunk")
    width, height = struct.unpack(">II", head[16:24])
    bit_depth, color_type = head[24], head[25]
    return width, height, bit_depth, color_type


def _check_png_header(path):
    width, height, bit_depth, color_type = png_header(path)
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: bad dimensions {width}x{height}")
    if bit_depth != 8:
        raise ImageFormatError(f"{path}: unsupported bit depth {bit_depth}")
    if color_type not in (2, 6):
        kind = _PNG_COLOR_TYPES.get(color_type, f"type {color_type}")
        raise ImageFormatError(f"{path}: unsupported color type ({kind})")


# --- PPM ----------------------------------------------------------------

def _read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(b"P6"):
        raise ImageFormatError(f"{path}: not a binary PPM (P6) file")

    # header tokens may be separated by whitespace and '#' comments
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated PPM header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval

    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise ImageFormatError(f"{path}: non-numeric PPM header field") from None
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"{path}: unsupported maxval {maxval} (only 255)")

    expected = width * height * 3
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise ImageFormatError(f"{path}: truncated PPM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3).copy()


def _write_ppm(path, pixels: np.ndarray):
    header = f"P6\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode()
    Path(path).write_bytes(header + pixels.tobytes())


# --- load / save ---------------------------------------------------------

def load_image(path) -> Rgb8Image:
    """Load a PNG or PPM file, dispatching on content."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"P6":
        return Rgb8Image(_read_ppm(path))

    _check_png_header(path)
    try:
        with PILImage.open(path) as img:
            img.load()
            if img.mode == "RGBA":
                img = img.convert("RGB")  # alpha discarded
            elif img.mode != "RGB":
                raise ImageFormatError(f"{path}: unsupported mode {img.mode}")
            arr = np.asarray(img, dtype=np.uint8)
    except (OSError, UnidentifiedImageError, SyntaxError) as exc:
        raise ImageFormatError(f"{path}: corrupt PNG ({exc})") from None
    return Rgb8Image(arr)


def save_image(path, image: Rgb8Image):
    """Write PNG or PPM, chosen by file extension."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".ppm":
        _write_ppm(path, image.pixels)
    elif suffix == ".png":
        PILImage.fromarray(image.pixels, mode="RGB").save(path, format="PNG")
    else:
        raise ValueError(f"unsupported image extension: {path.name}")


def image_size(path) -> tuple[int, int]:
    """(width, height) from the file header without decoding the raster."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"P6":
        arr_shape = _read_ppm(path).shape  # small files only; fine to read
        return arr_shape[1], arr_shape[0]
    width, height, _, _ = png_header(path)
    return width, height


# --- HSV (hexcone) -------------------------------------------------------
#
# Array forms live in _imaging_math (shared with the kernels) and are
# re-exported here. The scalar forms repeat the same expressions so
# results agree bit for bit; keep them in lockstep when editing.

def rgb_to_hsv(rgb: tuple[int, int, int]) -> HsvPixel:
    """Convert one 8-bit RGB triple; mirrors rgb_to_hsv_arrays exactly."""
    for c in rgb:
        if not 0 <= c <= 255:
            raise ValueError(f"rgb component out of range: {rgb}")
    r = rgb[0] / 255.0
    g = rgb[1] / 255.0
    b = rgb[2] / 255.0
    v = max(max(r, g), b)
    mn = min(min(r, g), b)
    d = v - mn
    if d == 0.0:
        h = 0.0
    elif v == r:
        h = 60.0 * ((g - b) / d)
    elif v == g:
        h = 60.0 * ((b - r) / d + 2.0)
    else:
        h = 60.0 * ((r - g) / d + 4.0)
    if h < 0.0:
        h += 360.0
    s = 0.0 if v == 0.0 else d / v
    return HsvPixel(h, s, v)


def hsv_to_rgb(pixel: HsvPixel) -> tuple[int, int, int]:
    """Convert back to 8-bit RGB; mirrors hsv_to_rgb_arrays exactly."""
    hp = pixel.h / 60.0
    sector = int(hp) % 6
    f = hp - np.floor(hp)
    s, v = pixel.s, pixel.v
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r, g, b = (
        (v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)
    )[sector]
    def to8(x):
        return int(min(max(np.floor(x * 255.0 + 0.5), 0.0), 255.0))
    return to8(r), to8(g), to8(b)
