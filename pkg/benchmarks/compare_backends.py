#!/usr/bin/env python3
"""Time the per-prefix estimation kernel under both backends.

Runs the same workloads through the numba-jitted loops and the batched-numpy
fallback and prints a timing table plus the max result deviation.  The numba
column includes a warm-up call so JIT compilation is not billed.

Usage: python benchmarks/compare_backends.py [--repeats 3]
"""

import argparse
import time

import numpy as np

from driftwave._kernels import HAS_NUMBA, wavelet_prefix_estimates

WORKLOADS = [
    ("haar, T=500, known sigma", dict(family="haar", sigma=0.2, delta=0.1), 500),
    ("db8,  T=500, known sigma", dict(family="db8", sigma=0.2, delta=0.1), 500),
    ("db8,  T=500, MAD sigma", dict(family="db8", sigma="mad", delta=0.1), 500),
    ("haar, T=2048, known sigma", dict(family="haar", sigma=1.0, delta=0.1), 2048),
    ("db8,  T=2048, known sigma", dict(family="db8", sigma=1.0, delta=0.1), 2048),
]


def time_backend(y, kwargs, backend, repeats):
    wavelet_prefix_estimates(y, backend=backend, **kwargs)  # warm-up / JIT
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = wavelet_prefix_estimates(y, backend=backend, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if not HAS_NUMBA:
        print("numba is not installed; only the numpy backend is available")

    rng = np.random.default_rng(0)
    print(f"{'workload':<28} {'numpy':>10} {'numba':>10} {'speedup':>9} {'max |diff|':>12}")
    for label, kwargs, T in WORKLOADS:
        y = rng.normal(0.0, 1.0, T)
        t_np, out_np = time_backend(y, kwargs, "numpy", args.repeats)
        if HAS_NUMBA:
            t_nb, out_nb = time_backend(y, kwargs, "numba", args.repeats)
            diff = float(np.abs(out_np - out_nb).max())
            print(f"{label:<28} {t_np*1e3:8.2f}ms {t_nb*1e3:8.2f}ms {t_np/t_nb:8.2f}x {diff:12.2e}")
        else:
            print(f"{label:<28} {t_np*1e3:8.2f}ms {'-':>10} {'-':>9} {'-':>12}")


if __name__ == "__main__":
    main()
