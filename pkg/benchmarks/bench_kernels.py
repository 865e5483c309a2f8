"""Time the numba kernels against their numpy/scipy fallbacks.

    python benchmarks/bench_kernels.py [--sizes 20 50 100 200] [--repeat 5]

The fallback is what runs when ``SJJ_METROLOGY_DISABLE_NUMBA=1`` is set; here
both are called directly so one process can compare them.  Each row also
reports the largest relative difference between the two results.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from sjj_metrology import kernels, qfi
from sjj_metrology._accel import HAVE_NUMBA
from sjj_metrology.sjj_model import SjjParams, build_hamiltonian, _fold


def best_ms(fn, repeat):
    return 1e3 * min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_bound(N, repeat):
    pa = qfi._pmf(N, 0.9)
    g = np.ascontiguousarray(qfi._scaled_generator(N, 3))
    x = np.random.default_rng(0).random(N + 1)
    x /= x.sum()
    kernels.bound_kernel_jit(x, pa, pa, g, True)  # compile outside the timer
    t_jit = best_ms(lambda: kernels.bound_kernel_jit(x, pa, pa, g, True), repeat)
    t_np = best_ms(lambda: kernels.bound_kernel_np(x, pa, pa, g, True), repeat)
    a = kernels.bound_kernel_jit(x, pa, pa, g, True)[0]
    b = kernels.bound_kernel_np(x, pa, pa, g, True)[0]
    return t_jit, t_np, abs(a - b) / abs(b)


def bench_hessian(N, repeat):
    pa = qfi._pmf(N, 0.9)
    g = np.ascontiguousarray(qfi._scaled_generator(N, 1))
    x = np.full(N + 1, 1.0 / (N + 1))
    kernels.bound_hessian_jit(x, pa, pa, g)
    t_jit = best_ms(lambda: kernels.bound_hessian_jit(x, pa, pa, g), repeat)
    t_np = best_ms(lambda: kernels.bound_hessian_np(x, pa, pa, g), repeat)
    a = kernels.bound_hessian_jit(x, pa, pa, g)
    b = kernels.bound_hessian_np(x, pa, pa, g)
    return t_jit, t_np, float(np.abs(a - b).max() / np.abs(b).max())


def bench_ground(N, repeat):
    d, e = _fold(build_hamiltonian(SjjParams(N, 2.0)), 1)
    kernels.lowest_eigenpair_jit(d, e, 100, 1e-14)
    t_jit = best_ms(lambda: kernels.lowest_eigenpair_jit(d, e, 100, 1e-14), repeat)
    t_np = best_ms(lambda: kernels.lowest_eigenpair_np(d, e, 100, 1e-14), repeat)
    a = kernels.lowest_eigenpair_jit(d, e, 100, 1e-14)[0]
    b = kernels.lowest_eigenpair_np(d, e, 100, 1e-14)[0]
    return t_jit, t_np, abs(a - b) / abs(b)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[20, 50, 100, 200])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; the jit columns time plain Python loops")
    print(f"{'kernel':<10}{'N':>6}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}{'rel diff':>12}")
    for name, fn in (("bound", bench_bound), ("hessian", bench_hessian), ("ground", bench_ground)):
        for N in args.sizes:
            t_jit, t_np, diff = fn(N, args.repeat)
            print(f"{name:<10}{N:>6}{t_jit:>12.3f}{t_np:>12.3f}{t_np / t_jit:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
