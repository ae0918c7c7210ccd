#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Usage:
    python benchmarks/benchmark_kernels.py
    python benchmarks/benchmark_kernels.py --sizes 320x240 1280x720 --repeats 200
    python benchmarks/benchmark_kernels.py --output results.json
"""

import argparse
import json
import time

import numpy as np

from entropykf import kernels
from entropykf.entropy import segment_bounds


def _parse_size(value):
    w, _, h = value.lower().partition("x")
    return int(w), int(h)


def _time(fn, args, repeats):
    fn(*args)  # warm (JIT compile / cache touch)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def bench_size(width, height, repeats, rng):
    px = rng.integers(0, 256, (height, width), dtype=np.uint8)
    px2 = rng.integers(0, 256, (height, width), dtype=np.uint8)
    counts = kernels.histogram256_np(px)
    rows, cols = segment_bounds(height), segment_bounds(width)

    cases = [
        ("histogram256", kernels.histogram256_np, (px,)),
        ("entropy_from_counts", kernels.entropy_from_counts_np, (counts, px.size)),
        ("segment_histograms", kernels.segment_histograms_np, (px, rows, cols)),
        ("pearson_sums", kernels.pearson_sums_np, (px, px2)),
    ]
    results = []
    print(f"\n{width}x{height} ({width * height} px), {repeats} repeats")
    print(f"{'kernel':<22} {'numpy (us)':>12} {'numba (us)':>12} {'speedup':>9}")
    print("-" * 58)
    for name, np_fn, args in cases:
        np_time = _time(np_fn, args, repeats)
        if kernels.NUMBA_AVAILABLE:
            nb_fn = getattr(kernels, np_fn.__name__.replace("_np", "_nb"))
            nb_time = _time(nb_fn, args, repeats)
            speedup = np_time / nb_time if nb_time else float("inf")
            print(f"{name:<22} {np_time * 1e6:>12.1f} {nb_time * 1e6:>12.1f} {speedup:>8.2f}x")
        else:
            nb_time = None
            speedup = None
            print(f"{name:<22} {np_time * 1e6:>12.1f} {'--':>12} {'--':>9}")
        results.append({
            "kernel": name, "width": width, "height": height,
            "numpy_us": np_time * 1e6,
            "numba_us": None if nb_time is None else nb_time * 1e6,
            "speedup": speedup,
        })
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", nargs="+", type=_parse_size,
                        default=[(160, 120), (320, 240), (640, 480)],
                        help="frame sizes as WxH")
    parser.add_argument("--repeats", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output", help="write results as JSON")
    args = parser.parse_args()

    print(f"numba available: {kernels.NUMBA_AVAILABLE}, "
          f"active path: {'numba' if kernels.USING_NUMBA else 'numpy'}")
    if kernels.NUMBA_AVAILABLE:
        kernels.warmup()

    rng = np.random.default_rng(args.seed)
    results = []
    for width, height in args.sizes:
        results.extend(bench_size(width, height, args.repeats, rng))

    if kernels.NUMBA_AVAILABLE:
        speedups = [r["speedup"] for r in results if r["speedup"]]
        print(f"\nmedian speedup: {sorted(speedups)[len(speedups) // 2]:.2f}x")

    if args.output:
        payload = {
            "numba_available": kernels.NUMBA_AVAILABLE,
            "repeats": args.repeats,
            "results": results,
        }
        with open(args.output, "w") as f:
            json.dump(payload, f, indent=2)
        print(f"results written to {args.output}")


if __name__ == "__main__":
    main()
