"""Compare the compiled kernels with the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import importlib
import timeit

import numpy as np

from tourprod import _kernels_py


def cases():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 40, 4096)
    xa, xb, xc = (rng.uniform(0, 30, 20_000) for _ in range(3))
    pts = rng.standard_normal((65_536, 5, 3))
    return {
        "bessel_i_scaled_table (4096 x 81)": lambda m: m.bessel_i_scaled_table(x, 80),
        "series_sum (20000 points)": lambda m: m.series_sum(xa, xb, xc, 80, 1e-15),
        "tour_products (65536 x 4 steps, d=3)": lambda m: m.tour_products(pts, True),
        "tour_log_products (same)": lambda m: m.tour_log_products(pts, True),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        compiled = importlib.import_module("tourprod._kernels")
    except ImportError:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    print(f"{'kernel':<40}{'python ms':>12}{'cython ms':>12}{'speed-up':>10}")
    for name, fn in cases().items():
        t = {}
        for label, mod in (("py", _kernels_py), ("cy", compiled)):
            fn(mod)  # warm-up
            t[label] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<40}{t['py']:>12.2f}{t['cy']:>12.2f}{t['py'] / t['cy']:>9.1f}x")


if __name__ == "__main__":
    main()
