"""Time the numba kernels against their numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``. The first numba call is
excluded from timing so compilation does not count.
"""
import time

import numpy as np

from shiftwalk import _kernels


def best_of(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def ctrw_case(kern, n_paths=2000, n_steps=20000, cap=64):
    rng = np.random.default_rng(0)
    x0 = rng.random(n_paths)
    steps = np.zeros((n_paths, cap), dtype=np.int64)
    signs = np.zeros((n_paths, cap), dtype=np.int64)
    counts = np.zeros(n_paths, dtype=np.int64)
    return lambda: kern(x0, 0.005, 0.005, n_steps, steps, signs, counts)


def example2_case(kern, n_paths=2000, n=5000, kappa=1.5, c=0.5):
    rng = np.random.default_rng(1)
    u = rng.random((n_paths, n))
    cp = np.array([n // 2, n], dtype=np.int64)
    out = np.zeros((n_paths, cp.size))
    return lambda: kern(u, -1.0 / kappa, c, cp, out)


def main():
    rows = [
        ("ctrw", ctrw_case(_kernels._ctrw_numba), ctrw_case(_kernels._ctrw_numpy)),
        ("example2 sums", example2_case(_kernels._example2_sums_numba),
         example2_case(_kernels._example2_sums_numpy)),
    ]
    print(f"{'kernel':<16}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, fast, slow in rows:
        fast()  # compile
        t_fast = best_of(fast)
        t_slow = best_of(slow)
        print(f"{name:<16}{t_fast:>12.4f}{t_slow:>12.4f}{t_slow / t_fast:>10.1f}")


if __name__ == "__main__":
    main()
