"""Benchmark the lab-frame stepping kernels: numba stream vs pure-numpy tree.

The numba path is the default; setting DONORSIM_BACKEND=numpy selects the
vectorized fallback.  This script times both implementations directly (no env
juggling needed) on the workloads that dominate real runs: the SU(2) midpoint
stream behind frame-equivalence checks, and the 4-dim split-step stream behind
the frozen-nucleus oracle.

Usage: python benchmarks/bench_kernels.py [--steps N]
"""

import argparse
import time

import numpy as np

from donorsim import DeviceParameters
from donorsim._kernels import (
    HAVE_NUMBA,
    _donor4_tree_np,
    _su2_tree_np,
    donor4_strang_product,
)
from donorsim.params import carrier_frequency
from donorsim.spin_model import single_donor_static

if HAVE_NUMBA:
    from donorsim._kernels import _donor4_strang_nb, _su2_stream_nb


def _time(fn, *args, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=2_000_000)
    args = parser.parse_args()
    n = args.steps

    p = DeviceParameters()
    w_ac = carrier_frequency(p)
    dt = 2.0 * np.pi / w_ac / 200.0
    az = -(0.5 * w_ac - 1.2e8)
    ax = p.transverse_energy / p.constants.hbar

    print(f"numba available: {HAVE_NUMBA}")
    print(f"su2 midpoint stream, {n} steps (dt = {dt:.2e} s):")
    su2_args = (az, ax, -w_ac, 0.0, 0.0, dt, n)
    if HAVE_NUMBA:
        _su2_stream_nb(*map(float, su2_args[:-1]), 10)  # compile
        t_nb, u_nb = _time(_su2_stream_nb, *su2_args)
        print(f"  numba stream : {t_nb:.3f} s  ({t_nb / n * 1e9:.1f} ns/step)")
    t_np, u_np = _time(_su2_tree_np, *su2_args)
    print(f"  numpy tree   : {t_np:.3f} s  ({t_np / n * 1e9:.1f} ns/step)")
    if HAVE_NUMBA:
        print(f"  speedup      : {t_np / t_nb:.1f}x; results agree to "
              f"{np.abs(u_nb - u_np).max():.1e}")

    m = max(n // 20, 10_000)
    w_static, v = np.linalg.eigh(single_donor_static(p.a0, p))
    e_half = (v * np.exp(-1j * w_static * (dt / (2 * p.constants.hbar)))) @ v.conj().T
    d4_args = (e_half, ax, -1.0, 0.0, w_ac, 0.0, 0.0, dt, m)
    print(f"donor 4-dim split-step stream, {m} steps:")
    if HAVE_NUMBA:
        donor4_strang_product(e_half, ax, -1.0, 0.0, w_ac, 0.0, 0.0, dt, 10)  # compile
        t_nb4, u_nb4 = _time(_donor4_strang_nb, *d4_args)
        print(f"  numba stream : {t_nb4:.3f} s  ({t_nb4 / m * 1e9:.1f} ns/step)")
    t_np4, u_np4 = _time(_donor4_tree_np, *d4_args)
    print(f"  numpy tree   : {t_np4:.3f} s  ({t_np4 / m * 1e9:.1f} ns/step)")
    if HAVE_NUMBA:
        print(f"  speedup      : {t_np4 / t_nb4:.1f}x; results agree to "
              f"{np.abs(u_nb4 - u_np4).max():.1e}")


if __name__ == "__main__":
    main()
