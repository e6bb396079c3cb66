"""Time the numba kernels against their numpy fallbacks, plus one full run per backend.

Usage: python3 benchmarks/bench_kernels.py [--reps N]
"""
import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from ocbf_merge import kernels
from ocbf_merge._jit import HAS_NUMBA


def cases(rng, n):
    qps = []
    for _ in range(n):
        m = int(rng.integers(2, 8))
        A = rng.uniform(-3, 3, size=(m, 2))
        A[rng.random(m) < 0.5, 1] = 0.0
        qps.append((A, rng.uniform(-10, 10, size=m), float(rng.uniform(-6, 6))))
    rel = [(rng.uniform(-3, 3, size=5), rng.uniform(-20, 20, size=5), float(rng.uniform(-8, 8)))
           for _ in range(n)]
    k = 400
    seg = (np.cumsum(rng.uniform(0.01, 0.1, size=k)), rng.uniform(0, 400, size=k),
           rng.uniform(0, 30, size=k), rng.uniform(-6, 5, size=k))
    times = np.sort(rng.uniform(seg[0][0], seg[0][-1], size=2000))
    return qps, rel, seg, times


def bench(label, fn, reps):
    fn()  # warm-up (includes JIT compilation for numba)
    best = min(timeit.repeat(fn, number=1, repeat=reps))
    print(f"  {label:<28s} {best * 1e3:9.2f} ms")
    return best


def full_run_seconds(disable):
    env = dict(os.environ, OCBF_MERGE_DISABLE_NUMBA="1" if disable else "0")
    code = ("import time; from ocbf_merge import SimConfig, run_event_driven as r;"
            "r(SimConfig(cav_count=5, rng_seed=0)); t=time.perf_counter();"
            "r(SimConfig(cav_count=20, rng_seed=0)); print(time.perf_counter()-t)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--n", type=int, default=2000, help="problems per kernel batch")
    args = ap.parse_args()
    if not HAS_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    qps, rel, seg, times = cases(np.random.default_rng(0), args.n)
    ox, ov = np.empty_like(times), np.empty_like(times)
    batches = {
        "qp_enumerate": (lambda f: lambda: [f(A, c, u, 10.0, 1e-9) for A, c, u in qps],
                         kernels.qp_enumerate_numba, kernels._qp_enumerate_numpy),
        "relaxed": (lambda f: lambda: [f(a, c, u, -5.886, 4.905) for a, c, u in rel],
                    kernels.relaxed_numba, kernels._relaxed_numpy),
        "sample_segments": (lambda f: lambda: f(*seg, times, ox, ov),
                            kernels.sample_segments_numba, kernels._sample_segments_numpy),
    }
    for name, (wrap, fast, slow) in batches.items():
        print(f"{name}:")
        a = bench("numba", wrap(fast), args.reps)
        b = bench("numpy", wrap(slow), args.reps)
        print(f"  speed-up {b / a:.1f}x")
    t_nb, t_np = full_run_seconds(False), full_run_seconds(True)
    print("event-triggered run, 20 vehicles:")
    print(f"  numba {t_nb:.2f} s, numpy {t_np:.2f} s, speed-up {t_np / t_nb:.1f}x")


if __name__ == "__main__":
    t0 = time.perf_counter()
    main()
    print(f"total {time.perf_counter() - t0:.1f} s")
