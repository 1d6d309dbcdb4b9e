"""Pure-numpy point kernel.

Reference implementation of the assignment/density evaluation; the compiled
kernel in ``_native.pyx`` mirrors the arithmetic operation by operation
(including accumulation order), so both backends return bitwise-identical
results.
"""

from __future__ import annotations

import numpy as np

from .packing import KIND_ATOMS, KIND_RECT, KIND_SEGMENT, PackedCatalog


def assign_points(packed: PackedCatalog, points: np.ndarray):
    """Assign each point to the first (lowest-dimension) carrier containing it.

    Returns ``(labels, density)`` where ``labels[i]`` is the top-level
    component index or -1, and ``density[i]`` is the packed weight times the
    local piecewise-constant density (0 off support).
    """
    pts = np.ascontiguousarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != packed.d:
        raise ValueError(f"points must have shape (N, {packed.d})")
    n = pts.shape[0]
    labels = np.full(n, -1, dtype=np.int32)
    density = np.zeros(n, dtype=float)
    free = np.ones(n, dtype=bool)

    for e in range(packed.n_entities):
        if not free.any():
            break
        k = int(packed.kind[e])
        g = int(packed.geo[e])
        w = float(packed.weight[e])
        lab = int(packed.label[e])
        if k == KIND_ATOMS:
            tol = float(packed.atom_tol[g])
            for a in range(int(packed.atom_off[g]), int(packed.atom_off[g + 1])):
                m = free.copy()
                for c in range(packed.d):
                    m &= np.abs(pts[:, c] - packed.atom_pts[a, c]) <= tol
                if m.any():
                    labels[m] = lab
                    density[m] = w * packed.atom_pmf[a]
                    free &= ~m
        elif k == KIND_SEGMENT:
            t = np.zeros(n)
            for c in range(packed.d):
                t += (pts[:, c] - packed.seg_a[g, c]) * packed.seg_dir[g, c]
            t /= packed.seg_len2[g]
            np.clip(t, 0.0, 1.0, out=t)
            r2 = np.zeros(n)
            for c in range(packed.d):
                diff = pts[:, c] - packed.seg_a[g, c] - t * packed.seg_dir[g, c]
                r2 += diff * diff
            m = free & (r2 <= packed.seg_tol2[g])
            if m.any():
                off = int(packed.seg_voff[g])
                npieces = int(packed.seg_voff[g + 1]) - off
                boff = off + g  # breaks pool carries one extra knot per segment
                piece = np.zeros(n, dtype=np.int64)
                for j in range(1, npieces):
                    piece += t >= packed.seg_breaks[boff + j]
                labels[m] = lab
                density[m] = w * packed.seg_vals[off + piece[m]]
                free &= ~m
        elif k == KIND_RECT:
            tol = float(packed.rect_tol[g])
            taken = np.zeros(n, dtype=bool)
            for p in range(int(packed.rect_poff[g]), int(packed.rect_poff[g + 1])):
                m = free & ~taken
                for c in range(packed.d):
                    if packed.rect_axis[g, c]:
                        m &= (pts[:, c] >= packed.rpiece_lo[p, c]) & (
                            pts[:, c] <= packed.rpiece_hi[p, c]
                        )
                    else:
                        m &= np.abs(pts[:, c] - packed.rect_anchor[g, c]) <= tol
                if m.any():
                    labels[m] = lab
                    density[m] = w * packed.rpiece_val[p]
                    taken |= m
            free &= ~taken
    return labels, density
