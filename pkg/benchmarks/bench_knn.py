"""Numba vs pure-numpy k-NN association and end-to-end simulation timings.

    python3 benchmarks/bench_knn.py [--repeat 5] [--full-scale]

The numpy path is the one selected by MULTICONN_DISABLE_NUMBA=1; here both
are called in-process through the ``use_numba`` switch.
"""
import argparse
import time

import numpy as np

from multiconn import kernels, simulator
from multiconn import pointprocess as pp
from multiconn._accel import HAS_NUMBA
from multiconn.analytic import NetworkParams


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--full-scale", action="store_true")
    args = ap.parse_args()
    region = simulator.FULL_REGION if args.full_scale else simulator.DESK_REGION
    params = NetworkParams()
    users = pp.sample_ppp(params.lambda_u, region, 1)
    bss = pp.sample_ppp(params.lambda_bs, region, 2)
    ux, uy, bx, by = users.x.copy(), users.y.copy(), bss.x.copy(), bss.y.copy()
    w, h = region.width, region.height
    print(f"region {w:g} x {h:g} m: {users.count} users, {bss.count} BSs; numba available: {HAS_NUMBA}")

    if HAS_NUMBA:  # compile once outside the timings
        kernels.knn_grid(ux[:10], uy[:10], bx, by, 1, w, h, False, use_numba=True)

    print(f"{'k':>2} {'numba [ms]':>11} {'numpy [ms]':>11} {'brute [ms]':>11} {'speed-up':>9}")
    for k in range(1, 6):
        t_np = best_of(lambda: kernels.knn_grid(ux, uy, bx, by, k, w, h, False, use_numba=False), args.repeat)
        t_nb = (best_of(lambda: kernels.knn_grid(ux, uy, bx, by, k, w, h, False, use_numba=True), args.repeat)
                if HAS_NUMBA else float("nan"))
        t_bf = best_of(lambda: kernels.knn_brute(ux, uy, bx, by, k, w, h, False), 1)
        a = kernels.knn_grid(ux, uy, bx, by, k, w, h, False, use_numba=False)
        if HAS_NUMBA:
            b = kernels.knn_grid(ux, uy, bx, by, k, w, h, False, use_numba=True)
            assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        print(f"{k:>2} {1e3 * t_nb:>11.1f} {1e3 * t_np:>11.1f} {1e3 * t_bf:>11.1f} {t_np / t_nb:>8.1f}x")

    cfg = simulator.SimConfig(params=params.replace(k=5), region=region)
    for flag in ([True, False] if HAS_NUMBA else [False]):
        t = best_of(lambda: simulator.run(cfg, use_numba=flag), max(1, args.repeat // 2))
        print(f"simulator.run k=5, one replication, {'numba' if flag else 'numpy'}: {t:.3f} s")


if __name__ == "__main__":
    main()
