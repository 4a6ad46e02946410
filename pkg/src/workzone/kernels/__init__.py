"""Raster kernel dispatch.

The compiled extension (_core, Cython) and the numpy fallback
(_fallback) implement identical semantics and produce byte-identical
output. Selection happens once at import:

    WORKZONE_KERNELS=auto      compiled when built, else fallback (default)
    WORKZONE_KERNELS=compiled  require the extension, fail loudly otherwise
    WORKZONE_KERNELS=fallback  force the numpy path
"""
import os

from ._common import gaussian_kernel1d, invert_affine

_choice = os.environ.get("WORKZONE_KERNELS", "auto").lower()
if _choice not in ("auto", "compiled", "fallback"):
    raise ValueError(
        f"WORKZONE_KERNELS must be auto, compiled, or fallback (got {_choice!r})"
    )

if _choice == "fallback":
    from . import _fallback as _backend
else:
    try:
        from . import _core as _backend  # type: ignore[attr-defined]
    except ImportError:
        if _choice == "compiled":
            raise ImportError(
                "WORKZONE_KERNELS=compiled but the extension is not built; "
                "reinstall without WORKZONE_SKIP_EXT"
            ) from None
        from . import _fallback as _backend

BACKEND = _backend.BACKEND_NAME
gaussian_blur = _backend.gaussian_blur
warp_affine = _backend.warp_affine
hsv_adjust = _backend.hsv_adjust

__all__ = [
    "BACKEND",
    "gaussian_blur",
    "warp_affine",
    "hsv_adjust",
    "gaussian_kernel1d",
    "invert_affine",
]
