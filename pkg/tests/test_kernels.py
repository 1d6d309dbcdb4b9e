import os
import subprocess
import sys

import numpy as np
import pytest

from strata_lab import RandomStream, backend_name, sample
from strata_lab._kernels import fallback

try:
    from strata_lab._kernels import _native
except ImportError:
    _native = None

needs_native = pytest.mark.skipif(_native is None, reason="compiled kernel not built")


def both(packed, pts):
    lf, df = fallback.assign_points(packed, pts)
    ln, dn = _native.assign_points(packed, pts)
    return (lf, df), (ln, dn)


@needs_native
class TestBackendAgreement:
    def test_sampled_points_bitwise_equal(self, m1, m3, atoms3, offgrid_measure):
        for i, m in enumerate((m1, m3, atoms3, offgrid_measure)):
            seq = sample(m, RandomStream(41, (i,)), 5000)
            (lf, df), (ln, dn) = both(m.packed(), seq.points)
            assert np.array_equal(lf, ln)
            assert np.array_equal(df, dn)

    def test_random_offgrid_points(self, m3):
        rng = RandomStream(42).generator()
        pts = rng.uniform(-0.5, 1.5, size=(20000, 2))
        (lf, df), (ln, dn) = both(m3.packed(), pts)
        assert np.array_equal(lf, ln)
        assert np.array_equal(df, dn)

    def test_boundary_points(self, m3, m1):
        # exact cell corners, atom positions, endpoints, off-by-ulp neighbours
        pts2 = np.array(
            [
                [0.25, 0.75],
                [np.nextafter(0.25, 1.0), 0.75],
                [0.0, 0.0],
                [1.0, 1.0],
                [0.5, 0.5],
                [0.5, np.nextafter(0.5, 1.0)],
            ]
        )
        (lf, df), (ln, dn) = both(m3.packed(), pts2)
        assert np.array_equal(lf, ln) and np.array_equal(df, dn)
        pts1 = np.array([[0.5], [np.nextafter(0.5, 0.0)], [0.0], [1.0], [2.0]])
        (lf, df), (ln, dn) = both(m1.packed(), pts1)
        assert np.array_equal(lf, ln) and np.array_equal(df, dn)

    def test_multi_piece_patch(self):
        from strata_lab import AxisAlignedPatch, build_standard_form

        patch = AxisAlignedPatch(
            anchor=[0.0, 0.25],
            axes=[0],
            sides=[1.0],
            pieces=[([0.0], [0.3], 2.0), ([0.3], [1.0], 4.0 / 7.0)],
        )
        m = build_standard_form([(1.0, patch)])
        rng = RandomStream(43).generator()
        pts = np.column_stack([rng.uniform(-0.1, 1.1, 5000), np.full(5000, 0.25)])
        pts[::7, 1] = 0.26  # some points off the carrier
        (lf, df), (ln, dn) = both(m.packed(), pts)
        assert np.array_equal(lf, ln) and np.array_equal(df, dn)


class TestBackendSelection:
    def test_backend_name(self):
        assert backend_name() in ("native", "fallback")

    def test_force_fallback_env(self):
        out = subprocess.run(
            [sys.executable, "-c", "import strata_lab; print(strata_lab.backend_name())"],
            env={**os.environ, "STRATA_LAB_FORCE_FALLBACK": "1"},
            capture_output=True,
            text=True,
            check=True,
        )
        assert out.stdout.strip() == "fallback"
