# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled point kernel.

Mirrors fallback.assign_points operation by operation (same arithmetic, same
accumulation order, same comparisons), so both backends return bitwise
identical labels and densities.
"""

import numpy as np

cimport numpy as cnp

from .packing import KIND_ATOMS, KIND_RECT, KIND_SEGMENT

cnp.import_array()


def assign_points(packed, points):
    pts_arr = np.ascontiguousarray(points, dtype=np.float64)
    if pts_arr.ndim != 2 or pts_arr.shape[1] != packed.d:
        raise ValueError(f"points must have shape (N, {packed.d})")
    cdef double[:, ::1] pts = pts_arr
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t d = pts.shape[1]

    labels_arr = np.full(n, -1, dtype=np.int32)
    density_arr = np.zeros(n, dtype=np.float64)
    cdef int[::1] labels = labels_arr
    cdef double[::1] density = density_arr

    cdef int[::1] kind = np.ascontiguousarray(packed.kind, dtype=np.int32)
    cdef int[::1] label = np.ascontiguousarray(packed.label, dtype=np.int32)
    cdef double[::1] weight = np.ascontiguousarray(packed.weight, dtype=np.float64)
    cdef long long[::1] geo = np.ascontiguousarray(packed.geo, dtype=np.int64)

    cdef long long[::1] atom_off = np.ascontiguousarray(packed.atom_off, dtype=np.int64)
    cdef double[:, ::1] atom_pts = np.ascontiguousarray(packed.atom_pts, dtype=np.float64)
    cdef double[::1] atom_pmf = np.ascontiguousarray(packed.atom_pmf, dtype=np.float64)
    cdef double[::1] atom_tol = np.ascontiguousarray(packed.atom_tol, dtype=np.float64)

    cdef double[:, ::1] seg_a = np.ascontiguousarray(packed.seg_a, dtype=np.float64)
    cdef double[:, ::1] seg_dir = np.ascontiguousarray(packed.seg_dir, dtype=np.float64)
    cdef double[::1] seg_len2 = np.ascontiguousarray(packed.seg_len2, dtype=np.float64)
    cdef double[::1] seg_tol2 = np.ascontiguousarray(packed.seg_tol2, dtype=np.float64)
    cdef long long[::1] seg_voff = np.ascontiguousarray(packed.seg_voff, dtype=np.int64)
    cdef double[::1] seg_breaks = np.ascontiguousarray(packed.seg_breaks, dtype=np.float64)
    cdef double[::1] seg_vals = np.ascontiguousarray(packed.seg_vals, dtype=np.float64)

    cdef double[:, ::1] rect_anchor = np.ascontiguousarray(packed.rect_anchor, dtype=np.float64)
    cdef unsigned char[:, ::1] rect_axis = np.ascontiguousarray(packed.rect_axis, dtype=np.uint8)
    cdef double[::1] rect_tol = np.ascontiguousarray(packed.rect_tol, dtype=np.float64)
    cdef long long[::1] rect_poff = np.ascontiguousarray(packed.rect_poff, dtype=np.int64)
    cdef double[:, ::1] rpiece_lo = np.ascontiguousarray(packed.rpiece_lo, dtype=np.float64)
    cdef double[:, ::1] rpiece_hi = np.ascontiguousarray(packed.rpiece_hi, dtype=np.float64)
    cdef double[::1] rpiece_val = np.ascontiguousarray(packed.rpiece_val, dtype=np.float64)

    cdef Py_ssize_t n_entities = kind.shape[0]
    cdef int kind_atoms = KIND_ATOMS
    cdef int kind_segment = KIND_SEGMENT
    cdef int kind_rect = KIND_RECT

    cdef Py_ssize_t i, e, c, g, j
    cdef long long a, p, off, boff, npieces, piece
    cdef double t, r2, diff, tol, tol2, x, cl, cu
    cdef bint hit, inside

    with nogil:
        for i in range(n):
            for e in range(n_entities):
                g = geo[e]
                hit = False
                if kind[e] == kind_atoms:
                    tol = atom_tol[g]
                    for a in range(atom_off[g], atom_off[g + 1]):
                        inside = True
                        for c in range(d):
                            diff = pts[i, c] - atom_pts[a, c]
                            if diff < 0:
                                diff = -diff
                            if diff > tol:
                                inside = False
                                break
                        if inside:
                            labels[i] = label[e]
                            density[i] = weight[e] * atom_pmf[a]
                            hit = True
                            break
                elif kind[e] == kind_segment:
                    t = 0.0
                    for c in range(d):
                        t = t + (pts[i, c] - seg_a[g, c]) * seg_dir[g, c]
                    t = t / seg_len2[g]
                    if t < 0.0:
                        t = 0.0
                    if t > 1.0:
                        t = 1.0
                    r2 = 0.0
                    for c in range(d):
                        diff = pts[i, c] - seg_a[g, c] - t * seg_dir[g, c]
                        r2 = r2 + diff * diff
                    if r2 <= seg_tol2[g]:
                        off = seg_voff[g]
                        npieces = seg_voff[g + 1] - off
                        boff = off + g
                        piece = 0
                        for j in range(1, npieces):
                            if t >= seg_breaks[boff + j]:
                                piece = piece + 1
                        labels[i] = label[e]
                        density[i] = weight[e] * seg_vals[off + piece]
                        hit = True
                else:
                    tol = rect_tol[g]
                    for p in range(rect_poff[g], rect_poff[g + 1]):
                        inside = True
                        for c in range(d):
                            x = pts[i, c]
                            if rect_axis[g, c]:
                                if x < rpiece_lo[p, c] or x > rpiece_hi[p, c]:
                                    inside = False
                                    break
                            else:
                                diff = x - rect_anchor[g, c]
                                if diff < 0:
                                    diff = -diff
                                if diff > tol:
                                    inside = False
                                    break
                        if inside:
                            labels[i] = label[e]
                            density[i] = weight[e] * rpiece_val[p]
                            hit = True
                            break
                if hit:
                    break
    return labels_arr, density_arr
