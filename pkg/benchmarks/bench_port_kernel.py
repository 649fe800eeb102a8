"""Benchmark the port-objective kernel: compiled extension vs NumPy twin.

Times the full-line objective evaluation for representative path counts and
port grids (the hot loop of multipath port selection and the downlink
simulation) and reports the speedup.

Run:
    python benchmarks/bench_port_kernel.py
"""
import math
import time

import numpy as np

from mpmp import _portgrid_py
from mpmp import kernels


def make_args(rng, n_paths, n_x):
    lam = 7.687e-3
    return (
        rng.uniform(0.05, 1.0, n_paths),
        rng.uniform(-math.pi, math.pi, n_paths),
        rng.uniform(-4000, 4000, n_paths),
        rng.uniform(-1, 1, n_paths),
        rng.uniform(-1, 1, n_paths),
        rng.uniform(-1, 1, n_paths),
        2,
        8,
        lam / 2,
        lam / 2,
        lam,
        1e-3,
        4e-3,
        np.ascontiguousarray(np.linspace(0.0, 20 * lam, n_x)),
    )


def time_fn(fn, args, min_time=0.3):
    fn(*args)  # warm up
    n = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn(*args)
        dt = time.perf_counter() - t0
        if dt >= min_time:
            return dt / n
        n = max(n * 2, int(n * min_time / max(dt, 1e-9)))


def main():
    rng = np.random.default_rng(0)
    cases = [(1, 300), (8, 1200), (16, 1200), (37, 1200), (37, 6000), (64, 2400)]
    compiled = kernels.backend() == "cython"
    print(f"active backend: {kernels.backend()}")
    print(f"{'paths':>6} {'grid':>6} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n_paths, n_x in cases:
        args = make_args(rng, n_paths, n_x)
        t_py = time_fn(_portgrid_py.objective_grid, args)
        if compiled:
            t_c = time_fn(kernels.objective_grid, args)
            a = kernels.objective_grid(*args)
            b = _portgrid_py.objective_grid(*args)
            assert np.max(np.abs(a - b)) <= 1e-12 * max(np.max(np.abs(b)), 1.0)
            print(
                f"{n_paths:>6} {n_x:>6} {1e3 * t_py:>10.3f} {1e3 * t_c:>10.3f} "
                f"{t_py / t_c:>7.1f}x"
            )
        else:
            print(f"{n_paths:>6} {n_x:>6} {1e3 * t_py:>10.3f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
