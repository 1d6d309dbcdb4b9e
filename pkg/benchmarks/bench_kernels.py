"""Benchmark the compiled point kernel against the numpy fallback.

Run with:  python benchmarks/bench_kernels.py [n_points]

The workload is the hot loop of every estimator: assigning a batch of points
to carriers and evaluating the mixture density.
"""

import math
import sys
import time

import numpy as np

from strata_lab import (
    AtomSet,
    AxisAlignedPatch,
    Box,
    RandomStream,
    Segment,
    build_standard_form,
    sample,
)
from strata_lab._kernels import fallback

try:
    from strata_lab._kernels import _native
except ImportError:
    _native = None


def benchmark_measure():
    """A k=3 measure with several entities per stratum: atoms, lines, area."""
    atoms = AtomSet(
        points=[[0.1, 0.9], [0.4, 0.2], [0.8, 0.5]], pmf=[0.5, 0.25, 0.25]
    )
    diag = Segment(a=[0.0, 0.0], b=[1.0, 1.0], values=[1 / math.sqrt(2)])
    edge = AxisAlignedPatch(
        anchor=[0.0, 2.0],
        axes=[0],
        sides=[1.0],
        pieces=[([0.0], [0.3], 2.0), ([0.3], [1.0], 4.0 / 7.0)],
    )
    box = Box(lo=[2.0, 0.0], hi=[3.0, 1.0])
    return build_standard_form([(0.2, atoms), (0.25, diag), (0.25, edge), (0.3, box)])


def time_backend(impl, packed, pts, repeats=5):
    impl.assign_points(packed, pts[:1000])  # warm up
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        impl.assign_points(packed, pts)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    measure = benchmark_measure()
    seq = sample(measure, RandomStream(0), n)
    pts = seq.points
    packed = measure.packed()

    t_fb = time_backend(fallback, packed, pts)
    print(f"points: {n}")
    print(f"fallback (numpy) : {t_fb:8.4f} s   {n / t_fb / 1e6:6.1f} Mpts/s")
    if _native is None:
        print("native           : not built (pure-python install)")
        return
    t_nat = time_backend(_native, packed, pts)
    print(f"native (cython)  : {t_nat:8.4f} s   {n / t_nat / 1e6:6.1f} Mpts/s")
    print(f"speedup          : {t_fb / t_nat:8.2f}x")
    lf, df = fallback.assign_points(packed, pts)
    ln, dn = _native.assign_points(packed, pts)
    same = np.array_equal(lf, ln) and np.array_equal(df, dn)
    print(f"bitwise agreement: {same}")


if __name__ == "__main__":
    main()
