#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Covers the two per-pixel hot loops: Gaussian heatmap compositing (68 bumps
per face, one render per training pair) and LBP code extraction (one pass
per evaluated image).  Also cross-checks that both backends agree.

Usage: python benchmarks/bench_kernels.py [--size 64] [--repeat 200]
"""

import argparse
import time

import numpy as np

from lm2face._kernels import slow
from lm2face.landmarks import template

try:
    from lm2face._kernels import _fast as fast
except ImportError:
    fast = None


def bench(fn, repeat):
    fn()  # warmup
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()

    size = args.size
    pts = template("frontal").points
    centers = np.clip(np.rint(pts * size), 0, size - 1).astype(np.int64)[:, ::-1].copy()
    rng = np.random.Generator(np.random.PCG64(0))
    img = rng.random((size, size))

    rows = []
    heat_slow = slow.gaussian_max_heatmap(centers, size, 2.0)
    codes_slow = slow.lbp_codes(img)
    t = bench(lambda: slow.gaussian_max_heatmap(centers, size, 2.0), args.repeat)
    rows.append(("heatmap", "numpy", t))
    t = bench(lambda: slow.lbp_codes(img), args.repeat)
    rows.append(("lbp", "numpy", t))

    if fast is None:
        print("compiled extension not built (python setup.py build_ext --inplace)")
    else:
        heat_fast = fast.gaussian_max_heatmap(centers, size, 2.0)
        codes_fast = fast.lbp_codes(img)
        assert np.abs(heat_fast - heat_slow).max() < 1e-12, "heatmap backends disagree"
        assert np.array_equal(codes_fast, codes_slow), "lbp backends disagree"
        t = bench(lambda: fast.gaussian_max_heatmap(centers, size, 2.0), args.repeat)
        rows.append(("heatmap", "cython", t))
        t = bench(lambda: fast.lbp_codes(img), args.repeat)
        rows.append(("lbp", "cython", t))

    print(f"{'kernel':<10} {'backend':<8} {'per call':>12}")
    for kernel, backend, dt in rows:
        print(f"{kernel:<10} {backend:<8} {dt * 1e6:>10.1f} us")
    for kernel in ("heatmap", "lbp"):
        times = {b: dt for k, b, dt in rows if k == kernel}
        if "cython" in times:
            print(f"{kernel}: cython is {times['numpy'] / times['cython']:.1f}x "
                  f"{'faster' if times['cython'] < times['numpy'] else 'slower'} than numpy")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
