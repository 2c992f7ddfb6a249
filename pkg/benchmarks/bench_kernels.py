"""Time every kernel under the numba and the numpy backend.

    python3 benchmarks/bench_kernels.py [--repeat N]

Workloads mirror one pair of the pipeline: a 1878-day training spread,
a DE population of 40, and the 200-point c grid.
"""
import argparse
import timeit

import numpy as np

from stochspread._kernels import jit, reference


def workloads(rng):
    T = 1878
    s = 1.0 + np.cumsum(rng.normal(0, 0.01, T)) * 0.1
    pop = np.column_stack([rng.uniform(0, 1, 40), rng.uniform(1e-6, 1 - 1e-6, 40),
                           rng.uniform(1e-8, 1, 40), rng.uniform(0, 1, 40)])
    equity = 1.0 + np.cumsum(rng.normal(0, 0.01, T))
    fallback = 10 * np.var(s, ddof=1)
    p0 = 0.05 ** 2 / (1 - 0.9 ** 2)
    bands = np.geomspace(0.01, 200, 200) * 0.01

    def kalman(k):
        fm, fv, pm, pv, _, _ = k.kalman_filter(s, 0.1, 0.9, 0.05, 0.02, s[0], p0)
        k.rts_smoother(fm, fv, pm, pv, 0.9)

    def rule_grid(k):
        for b in bands:
            k.rule_positions(s, 1.0, b, 1e-4)

    return {
        "kalman filter + smoother (T=1878)": kalman,
        "loglik batch (40 x 1878)": lambda k: k.loglik_batch(s, pop, s[0], fallback),
        "rule positions (200 c values)": rule_grid,
        "max drawdown (T=1878)": lambda k: k.max_drawdown(equity, False),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    opts = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<36}{'numba ms':>12}{'numpy ms':>12}{'speed-up':>10}")
    for name, work in workloads(rng).items():
        work(jit)  # compile (or load from cache) outside the timing
        times = {}
        for label, mod in (("numba", jit), ("numpy", reference)):
            number = 3
            best = min(timeit.repeat(lambda: work(mod), number=number, repeat=opts.repeat)) / number
            times[label] = best * 1e3
        print(f"{name:<36}{times['numba']:>12.3f}{times['numpy']:>12.3f}{times['numpy'] / times['numba']:>9.1f}x")


if __name__ == "__main__":
    main()
