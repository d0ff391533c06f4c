#!/usr/bin/env python3
"""Time the lattice kernels with numba and with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

The first numba call compiles (or loads from cache); it is run once untimed.
"""

import argparse
import time

import numpy as np

from bnetlab import _kernels as K
from bnetlab._accel import HAVE_NUMBA


def cases():
    seeds = np.arange(200, dtype=np.uint64)
    start = np.arange(-2000, 2001, 2)
    yield "site_states 1e6", lambda impl: K.site_states(7, 0.1, np.arange(-500_000, 500_000), 0, impl=impl)
    yield "trace 100x2000", lambda impl: K.trace(7, 0.1, np.arange(-100, 100, 2), 0, 2000, 0, False,
                                                 -5000, 5000, impl=impl)
    yield "pair_gaps 200x2000", lambda impl: K.pair_gaps(seeds, 0.05, 2000, -2100, 2100, impl=impl)
    yield "evolve 2000 sites x 1000", lambda impl: K.evolve_pruned(7, 0.05, start, 0, 1000, -4000, 4000,
                                                                   -100, 100, impl=impl)
    yield "wedge_closed 200x2000", lambda impl: K.wedge_closed(seeds, 0.05, -11, 11, 2000, impl=impl)
    yield "flux_events 1000", lambda impl: K.flux_events(7, 0.05, 1000, -2002, impl=impl)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'kernel':28s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, fn in cases():
        t_np = best_of(lambda: fn("numpy"), args.repeat)
        if HAVE_NUMBA:
            fn("numba")  # compile / cache load
            t_nb = best_of(lambda: fn("numba"), args.repeat)
            print(f"{name:28s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}")
        else:
            print(f"{name:28s} {t_np:10.4f} {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
