"""Time the compiled kernels against the pure-Python fallback.

Usage: ``python benchmarks/bench_kernels.py [--repeat R]``
"""
import argparse
import time

import numpy as np

from coherence import _pykernels

try:
    from coherence import _kernels
except ImportError:
    _kernels = None


def _problem(rng, n, N):
    A = (rng.random((n, N)) < 0.4).astype(float)
    A[A.sum(axis=1) == 0, 0] = 1.0
    t = rng.uniform(0.05, 0.95, n)
    w = np.ones(n)
    codes = np.zeros(n, dtype=np.int32)
    x0 = np.full(N, 1.0 / N)
    return A, t, w, codes, x0


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(repeat=5, seed=0):
    rng = np.random.default_rng(seed)
    cases = []
    for N, reps in ((8, 2000), (2000, 200)):
        y = rng.normal(size=N)
        cases.append((f"project_simplex (N={N}, x{reps})",
                      lambda k, y=y, reps=reps: [k.project_simplex(y) for _ in range(reps)]))
    A, t, w, codes, _ = _problem(rng, 40, 64)
    x = rng.dirichlet(np.ones(64))
    cases.append(("value+gradient (n=40, N=64, x200)",
                  lambda k, P=(A, t, w, codes, x): [k.separable_value_grad(*P) for _ in range(200)]))
    probs = [_problem(rng, 6, 8) for _ in range(50)]
    cases.append(("projection solve (n=6, N=8, x50)",
                  lambda k: [k.spg_separable(*p, 1e-9, 100000) for p in probs]))
    big = _problem(rng, 30, 48)
    cases.append(("projection solve (n=30, N=48)",
                  lambda k: k.spg_separable(*big, 1e-9, 100000)))

    print(f"{'kernel':40s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s}")
    for name, fn in cases:
        tp = _time(lambda: fn(_pykernels), repeat)
        if _kernels is None:
            print(f"{name:40s} {tp:12.4f} {'n/a':>12s} {'n/a':>9s}")
            continue
        tc = _time(lambda: fn(_kernels), repeat)
        print(f"{name:40s} {tp:12.4f} {tc:12.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    run(a.repeat, a.seed)
