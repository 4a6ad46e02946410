"""Build hook for the compiled kernel extension.

The package works without the extension (numpy fallback); set
WORKZONE_SKIP_EXT=1 to skip compilation entirely.
"""
import os

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("WORKZONE_SKIP_EXT") == "1":
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "workzone.kernels._core",
        ["src/workzone/kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off: the numpy fallback must stay bit-identical,
        # so FMA contraction has to be disabled.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
