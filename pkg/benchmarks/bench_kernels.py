#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

The two hot loops of the laboratory are the transfer-operator stencil (run
thousands of times during power iteration and convergence experiments) and
the segment sums behind measure coarsening (run once per dual-operator
step).  Both backends compute identical results; this script reports the
speed difference.

Run:  python benchmarks/bench_kernels.py [--grid N] [--iters K]
"""

import argparse
import time

import numpy as np

from ifslab import _kernels_py

try:
    from ifslab import _kernels
except ImportError:
    _kernels = None


def _bench(fn, *args, repeat=5, inner=1):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def bench_transfer(backend, n, m, iters, seed=0):
    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.2, 0.8, size=(m, n))
    idx = rng.integers(0, n - 1, size=(m, n)).astype(np.int64)
    frac = rng.uniform(0.0, 1.0, size=(m, n))
    values = rng.uniform(0.5, 1.5, size=n)

    def run():
        v = values
        out = np.empty_like(v)
        for _ in range(iters):
            v = backend.transfer_apply(weights, idx, frac, v, out=None)
        return v

    return _bench(run), run()


def bench_coarsen(backend, n_atoms, n_cells, seed=0):
    rng = np.random.default_rng(seed)
    cells = np.sort(rng.integers(0, n_cells, size=n_atoms))
    values = rng.uniform(0.0, 1.0, size=n_atoms)
    starts = np.flatnonzero(np.concatenate(([True], cells[1:] != cells[:-1]))).astype(np.int64)
    return _bench(backend.segment_sums, values, starts), backend.segment_sums(values, starts)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=4096)
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--atoms", type=int, default=1_000_000)
    args = ap.parse_args()

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.append(("compiled", _kernels))
    else:
        print("compiled kernels not available; benchmarking fallback only")

    print(f"transfer_apply: grid={args.grid}, m=2, {args.iters} iterations")
    results = {}
    for name, mod in backends:
        t, v = bench_transfer(mod, args.grid, 2, args.iters)
        results[name] = (t, v)
        print(f"  {name:9s} {t * 1e3:10.2f} ms")
    if len(results) == 2:
        tp, vp = results["python"]
        tc, vc = results["compiled"]
        print(f"  speedup   {tp / tc:10.2f}x   max |diff| = {np.abs(vp - vc).max():.3g}")

    print(f"segment_sums: {args.atoms} atoms, ~{args.grid} cells")
    results = {}
    for name, mod in backends:
        t, v = bench_coarsen(mod, args.atoms, args.grid)
        results[name] = (t, v)
        print(f"  {name:9s} {t * 1e3:10.2f} ms")
    if len(results) == 2:
        tp, vp = results["python"]
        tc, vc = results["compiled"]
        print(f"  speedup   {tp / tc:10.2f}x   max |diff| = {np.abs(vp - vc).max():.3g}")


if __name__ == "__main__":
    main()
