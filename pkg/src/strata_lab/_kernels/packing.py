"""Flat array representation of a component catalog for the point kernels.

Every membership/density query in the package flows through
``assign_points(packed, points)`` so that the compiled and the numpy backend
evaluate exactly the same arithmetic in exactly the same order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KIND_ATOMS = 0
KIND_SEGMENT = 1
KIND_RECT = 2


@dataclass
class PackedCatalog:
    d: int
    # entity table, ordered by ascending carrier dimension (first match wins)
    kind: np.ndarray  # (M,) int32
    label: np.ndarray  # (M,) int32, top-level component index
    weight: np.ndarray  # (M,) float64, q_i times inner weight
    geo: np.ndarray  # (M,) int64, row in the kind-specific pool

    # atom pool
    atom_off: np.ndarray  # (n_atom_entities + 1,) int64
    atom_pts: np.ndarray  # (A, d) float64
    atom_pmf: np.ndarray  # (A,) float64
    atom_tol: np.ndarray  # (n_atom_entities,) float64

    # segment pool
    seg_a: np.ndarray  # (S, d)
    seg_dir: np.ndarray  # (S, d)
    seg_len2: np.ndarray  # (S,)
    seg_tol2: np.ndarray  # (S,)
    seg_voff: np.ndarray  # (S + 1,) int64 offsets into seg_vals
    seg_breaks: np.ndarray  # breaks pool; segment s occupies seg_voff[s] + s ...
    seg_vals: np.ndarray  # values pool

    # rectangle pool (axis-aligned patches and boxes)
    rect_anchor: np.ndarray  # (R, d)
    rect_axis: np.ndarray  # (R, d) uint8, 1 where the patch extends
    rect_tol: np.ndarray  # (R,)
    rect_poff: np.ndarray  # (R + 1,) int64 offsets into piece arrays
    rpiece_lo: np.ndarray  # (P, d) global coordinates
    rpiece_hi: np.ndarray  # (P, d)
    rpiece_val: np.ndarray  # (P,)

    @property
    def n_entities(self) -> int:
        return self.kind.shape[0]


def pack_components(weighted_components) -> PackedCatalog:
    """Pack ``[(weight, component), ...]`` into flat arrays.

    Mixture components are expanded into their members with multiplied
    weights; entities are stably sorted by carrier dimension so that a point
    on several carriers is assigned to the lowest-dimensional one.
    """
    from ..geometry import AtomSet, AxisAlignedPatch, Segment

    entities = []
    for comp_idx, (q, comp) in enumerate(weighted_components):
        for sub, w in zip(comp.entities(), comp.inner_weights()):
            entities.append((sub.dimension, comp_idx, float(q) * float(w), sub))
    entities.sort(key=lambda e: e[0])
    if not entities:
        raise ValueError("cannot pack an empty catalog")
    d = entities[0][3].ambient_dim

    kind, label, weight, geo = [], [], [], []
    atom_off, atom_pts, atom_pmf, atom_tol = [0], [], [], []
    seg_a, seg_dir, seg_len2, seg_tol2 = [], [], [], []
    seg_voff, seg_breaks, seg_vals = [0], [], []
    rect_anchor, rect_axis, rect_tol, rect_poff = [], [], [], [0]
    rpiece_lo, rpiece_hi, rpiece_val = [], [], []

    for _, comp_idx, w, sub in entities:
        label.append(comp_idx)
        weight.append(w)
        if isinstance(sub, AtomSet):
            kind.append(KIND_ATOMS)
            geo.append(len(atom_tol))
            atom_pts.extend(sub.points)
            atom_pmf.extend(sub.pmf)
            atom_off.append(atom_off[-1] + len(sub.pmf))
            atom_tol.append(sub.match_tol)
        elif isinstance(sub, Segment):
            kind.append(KIND_SEGMENT)
            geo.append(len(seg_len2))
            seg_a.append(sub.a)
            seg_dir.append(sub.direction)
            seg_len2.append(float(np.dot(sub.direction, sub.direction)))
            seg_tol2.append(sub.match_tol * sub.match_tol)
            seg_breaks.extend(sub.breaks)
            seg_vals.extend(sub.values)
            seg_voff.append(seg_voff[-1] + sub.values.size)
        elif isinstance(sub, AxisAlignedPatch):
            kind.append(KIND_RECT)
            geo.append(len(rect_tol))
            rect_anchor.append(sub.anchor)
            axis = np.zeros(d, dtype=np.uint8)
            axis[list(sub.axes)] = 1
            rect_axis.append(axis)
            rect_tol.append(sub.match_tol)
            for k in range(sub.piece_val.size):
                lo, hi = sub.global_piece_bounds(k)
                rpiece_lo.append(lo)
                rpiece_hi.append(hi)
                rpiece_val.append(float(sub.piece_val[k]))
            rect_poff.append(rect_poff[-1] + sub.piece_val.size)
        else:
            raise TypeError(f"cannot pack {type(sub).__name__}")

    def farr(rows, width=None):
        if not rows:
            return np.zeros((0, width) if width else 0, dtype=float)
        return np.asarray(rows, dtype=float)

    return PackedCatalog(
        d=d,
        kind=np.asarray(kind, dtype=np.int32),
        label=np.asarray(label, dtype=np.int32),
        weight=np.asarray(weight, dtype=float),
        geo=np.asarray(geo, dtype=np.int64),
        atom_off=np.asarray(atom_off, dtype=np.int64),
        atom_pts=farr(atom_pts, d),
        atom_pmf=farr(atom_pmf),
        atom_tol=farr(atom_tol),
        seg_a=farr(seg_a, d),
        seg_dir=farr(seg_dir, d),
        seg_len2=farr(seg_len2),
        seg_tol2=farr(seg_tol2),
        seg_voff=np.asarray(seg_voff, dtype=np.int64),
        seg_breaks=farr(seg_breaks),
        seg_vals=farr(seg_vals),
        rect_anchor=farr(rect_anchor, d),
        rect_axis=(
            np.asarray(rect_axis, dtype=np.uint8)
            if rect_axis
            else np.zeros((0, d), dtype=np.uint8)
        ),
        rect_tol=farr(rect_tol),
        rect_poff=np.asarray(rect_poff, dtype=np.int64),
        rpiece_lo=farr(rpiece_lo, d),
        rpiece_hi=farr(rpiece_hi, d),
        rpiece_val=farr(rpiece_val),
    )
