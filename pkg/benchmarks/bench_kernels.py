"""Compare the compiled raster kernels against the numpy fallback.

Checks byte-identical parity on random inputs, then times each kernel
on both backends. Run from a checkout or an installed tree:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --side 1280 --repeats 5
"""
import argparse
import math
import sys
import time

import numpy as np

from workzone.kernels import _fallback, gaussian_kernel1d, invert_affine
from workzone.tables import format_table

try:
    from workzone.kernels import _core
except ImportError:
    _core = None


def _rotation_inverse(side: int, degrees: float) -> np.ndarray:
    t = math.radians(degrees)
    c, s = math.cos(t), math.sin(t)
    cx = cy = side / 2.0
    fwd = np.array(
        [
            [c, -s, cx - c * cx + s * cy],
            [s, c, cy - s * cx - c * cy],
            [0.0, 0.0, 1.0],
        ]
    )
    return invert_affine(fwd)


def _cases(side: int, rng):
    img = rng.integers(0, 256, size=(side, side, 3), dtype=np.uint8)
    inv = _rotation_inverse(side, 17.0)
    return [
        ("gaussian_blur s=1.5", "gaussian_blur", (img, 1.5)),
        ("gaussian_blur s=3.0", "gaussian_blur", (img, 3.0)),
        ("warp_affine rot 17d", "warp_affine", (img, inv, (114, 114, 114))),
        ("hsv_adjust sat+hue", "hsv_adjust", (img, 1.3, 40.0)),
    ]


def _best_of(fn, args, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--side", type=int, default=640, help="square image side")
    ap.add_argument("--repeats", type=int, default=3, help="best-of timing runs")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if _core is None:
        print("compiled extension not built; timing the fallback only",
              file=sys.stderr)

    rng = np.random.default_rng(args.seed)
    rows = []
    for label, name, call_args in _cases(args.side, rng):
        slow = _best_of(getattr(_fallback, name), call_args, args.repeats)
        if _core is None:
            rows.append([label, f"{slow * 1e3:.1f}", "-", "-", "-"])
            continue
        fast = _best_of(getattr(_core, name), call_args, args.repeats)
        same = np.array_equal(
            getattr(_core, name)(*call_args), getattr(_fallback, name)(*call_args)
        )
        rows.append(
            [
                label,
                f"{slow * 1e3:.1f}",
                f"{fast * 1e3:.1f}",
                f"{slow / fast:.1f}x",
                "ok" if same else "MISMATCH",
            ]
        )

    # sanity: the shared helpers really are shared
    assert np.allclose(gaussian_kernel1d(2.0).sum(), 1.0)

    print(f"side {args.side}, best of {args.repeats}")
    print(
        format_table(
            ["kernel", "fallback ms", "compiled ms", "speedup", "parity"],
            rows,
            align="lrrrr",
        )
    )
    if any(r[-1] == "MISMATCH" for r in rows):
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
