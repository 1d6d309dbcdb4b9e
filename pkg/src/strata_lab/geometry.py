"""Catalog of rectifiable components: atoms, segments, axis-aligned patches, boxes.

Each component is an m-rectifiable probability measure given by a carrier set
E with finite positive H^m measure and a piecewise-constant density with
respect to H^m restricted to E.  The catalog is closed under everything the
estimators need in exact arithmetic: carrier measures, entropies, samplers,
and dyadic-cell intersections.

Conventions
-----------
* Densities are strictly positive on their pieces, so the carrier coincides
  with the support.
* Dyadic cells at level l are the half-open cubes prod_i [j_i 2^-l, (j_i+1) 2^-l).
* Axis-aligned patches use coordinate-axis frames, so H^m equals the product
  of side lengths; arbitrary orientation is supported only for 1-dimensional
  segments, where H^1 is the Euclidean length.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence

import numpy as np

from .errors import OverlappingCarriers, UnsupportedGeometry

# Relative tolerance for validating that a density integrates to one, and for
# the geometric predicates (carrier membership, overlap detection).
MASS_RTOL = 1e-9
POINT_MATCH_RTOL = 1e-12
SEGMENT_MATCH_RTOL = 1e-9

CellKey = tuple[int, ...]


def _as_vector(x, d: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if d is not None and v.size != d:
        raise ValueError(f"expected a vector of length {d}, got {v.size}")
    return v


def _scale_of(*arrays: np.ndarray) -> float:
    m = 1.0
    for a in arrays:
        if a.size:
            m = max(m, float(np.max(np.abs(a))))
    return m


def _interval_overlap(lo1: float, hi1: float, lo2: float, hi2: float) -> float:
    return max(0.0, min(hi1, hi2) - max(lo1, lo2))


def cell_bounds(level: int, index: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper corners of the half-open dyadic cell."""
    h = 2.0**-level
    j = np.asarray(index, dtype=float)
    return j * h, (j + 1.0) * h


class RectifiableComponent:
    """Base class; concrete shapes fill in geometry-specific math."""

    dimension: int
    ambient_dim: int

    # -- catalog contract -------------------------------------------------
    def carrier_measure(self) -> float:
        """H^m of the carrier."""
        raise NotImplementedError

    def entropy(self) -> float:
        """Closed-form -∫ f ln f dH^m over the carrier, in nats."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` points from the component's law, shape (size, d)."""
        raise NotImplementedError

    def cell_intersection(self, level: int, index: Sequence[int]) -> tuple[float, float]:
        """(probability mass, H^m measure) of the carrier inside one dyadic cell."""
        raise NotImplementedError

    def cells(self, level: int) -> dict[CellKey, tuple[float, float]]:
        """All dyadic cells meeting the carrier: index -> (mass, measure)."""
        raise NotImplementedError

    def cells_upper_bound(self, level: int) -> int:
        """Cheap upper bound on the number of cells the carrier can touch."""
        raise NotImplementedError

    def entities(self) -> list["RectifiableComponent"]:
        """Flat list of atomic shapes weighted within this component."""
        return [self]

    def inner_weights(self) -> np.ndarray:
        return np.ones(1)

    # -- membership / density, via the packed point kernels ---------------
    def packed(self):
        from ._kernels.packing import pack_components

        if not hasattr(self, "_packed"):
            object.__setattr__(self, "_packed", pack_components([(1.0, self)]))
        return self._packed

    def density(self, points: np.ndarray) -> np.ndarray:
        """dρ/dμ at each point; 0 off the carrier."""
        from ._kernels import assign_points

        _, dens = assign_points(self.packed(), np.atleast_2d(np.asarray(points, dtype=float)))
        return dens

    def contains(self, points: np.ndarray) -> np.ndarray:
        from ._kernels import assign_points

        labels, _ = assign_points(self.packed(), np.atleast_2d(np.asarray(points, dtype=float)))
        return labels >= 0


class AtomSet(RectifiableComponent):
    """Finite set of atoms with a pmf; m = 0, reference measure is counting.

    Parameters
    ----------
    points : (k, d) array
        Distinct atom locations.
    pmf : (k,) array
        Strictly positive probabilities summing to one.
    """

    dimension = 0

    def __init__(self, points, pmf):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        p = np.asarray(pmf, dtype=float).reshape(-1)
        if pts.shape[0] != p.size:
            raise ValueError("points and pmf length mismatch")
        if np.any(p <= 0):
            raise ValueError("atom pmf entries must be strictly positive")
        if abs(p.sum() - 1.0) > MASS_RTOL:
            raise ValueError(f"atom pmf sums to {p.sum()!r}, expected 1")
        self.points = pts
        self.pmf = p
        self.ambient_dim = pts.shape[1]
        self.match_tol = POINT_MATCH_RTOL * _scale_of(pts)
        for i in range(len(p)):
            for j in range(i + 1, len(p)):
                if np.max(np.abs(pts[i] - pts[j])) <= self.match_tol:
                    raise ValueError("duplicate atom locations")

    def carrier_measure(self) -> float:
        return float(len(self.pmf))

    def entropy(self) -> float:
        return float(-np.sum(self.pmf * np.log(self.pmf)))

    def sample(self, rng, size):
        idx = rng.choice(len(self.pmf), size=size, p=self.pmf / self.pmf.sum())
        return self.points[idx]

    def cell_intersection(self, level, index):
        lo, hi = cell_bounds(level, index)
        inside = np.all((self.points >= lo) & (self.points < hi), axis=1)
        return float(self.pmf[inside].sum()), float(np.count_nonzero(inside))

    def cells_upper_bound(self, level):
        return len(self.pmf)

    def cells(self, level):
        scale = 2.0**level
        out: dict[CellKey, tuple[float, float]] = {}
        keys = np.floor(self.points * scale).astype(np.int64)
        for key_row, p in zip(keys, self.pmf):
            key = tuple(int(j) for j in key_row)
            mass, meas = out.get(key, (0.0, 0.0))
            out[key] = (mass + float(p), meas + 1.0)
        return out


class Segment(RectifiableComponent):
    """Oriented line segment with a piecewise-constant density w.r.t. arc length.

    The density is described on the parameter interval [0, 1]:
    ``breaks`` are the piece boundaries (0 = breaks[0] < ... < breaks[-1] = 1)
    and ``values[j]`` is the density w.r.t. H^1 on piece j, so the total mass
    is sum_j values[j] * (breaks[j+1]-breaks[j]) * |b-a| = 1.
    """

    dimension = 1

    def __init__(self, a, b, breaks=None, values=None):
        self.a = _as_vector(a)
        self.b = _as_vector(b, self.a.size)
        self.ambient_dim = self.a.size
        self.direction = self.b - self.a
        self.length = float(np.linalg.norm(self.direction))
        if self.length <= 0:
            raise ValueError("segment endpoints coincide")
        if breaks is None:
            breaks = [0.0, 1.0]
        if values is None:
            values = [1.0 / self.length]
        self.breaks = np.asarray(breaks, dtype=float).reshape(-1)
        self.values = np.asarray(values, dtype=float).reshape(-1)
        if self.breaks.size != self.values.size + 1:
            raise ValueError("need len(breaks) == len(values) + 1")
        if self.breaks[0] != 0.0 or self.breaks[-1] != 1.0 or np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breaks must increase strictly from 0 to 1")
        if np.any(self.values <= 0):
            raise ValueError("density values must be strictly positive")
        mass = float(np.sum(self.values * np.diff(self.breaks)) * self.length)
        if abs(mass - 1.0) > MASS_RTOL:
            raise ValueError(f"segment density integrates to {mass!r}, expected 1")
        self.match_tol = SEGMENT_MATCH_RTOL * _scale_of(self.a, self.b)

    def carrier_measure(self) -> float:
        return self.length

    def entropy(self) -> float:
        piece_len = np.diff(self.breaks) * self.length
        return float(-np.sum(self.values * np.log(self.values) * piece_len))

    def sample(self, rng, size):
        masses = self.values * np.diff(self.breaks) * self.length
        masses = masses / masses.sum()
        piece = rng.choice(self.values.size, size=size, p=masses)
        u = rng.random(size)
        t = self.breaks[piece] + u * (self.breaks[piece + 1] - self.breaks[piece])
        return self.a[None, :] + t[:, None] * self.direction[None, :]

    # -- parameter-domain clipping against dyadic cells --------------------
    def _clip_to_cell(self, level: int, index: Sequence[int]) -> tuple[float, float]:
        """Parameter interval of the segment inside the half-open cell."""
        h = 2.0**-level
        lo_t, hi_t = 0.0, 1.0
        for c in range(self.ambient_dim):
            cl = index[c] * h
            cu = (index[c] + 1) * h
            dc = self.direction[c]
            if dc == 0.0:
                if not (cl <= self.a[c] < cu):
                    return 0.0, 0.0
            else:
                t0 = (cl - self.a[c]) / dc
                t1 = (cu - self.a[c]) / dc
                if dc < 0.0:
                    t0, t1 = t1, t0
                lo_t = max(lo_t, t0)
                hi_t = min(hi_t, t1)
        if hi_t <= lo_t:
            return 0.0, 0.0
        return lo_t, hi_t

    def _mass_on_interval(self, lo_t: float, hi_t: float) -> float:
        mass = 0.0
        for j in range(self.values.size):
            seg = _interval_overlap(lo_t, hi_t, self.breaks[j], self.breaks[j + 1])
            if seg > 0.0:
                mass += self.values[j] * seg * self.length
        return mass

    def cell_intersection(self, level, index):
        lo_t, hi_t = self._clip_to_cell(level, index)
        if hi_t <= lo_t:
            return 0.0, 0.0
        return self._mass_on_interval(lo_t, hi_t), (hi_t - lo_t) * self.length

    def cells_upper_bound(self, level):
        span = np.abs(self.direction) * 2.0**level
        return int(np.sum(np.ceil(span) + 2)) + 1

    def cells(self, level):
        # Walk the grid crossings in the parameter domain; each visited cell
        # is then measured with the same clip used by cell_intersection so
        # single-cell queries and full tables agree bitwise.
        h = 2.0**-level
        crossings = {0.0, 1.0}
        for c in range(self.ambient_dim):
            dc = self.direction[c]
            if dc == 0.0:
                continue
            lo, hi = min(self.a[c], self.b[c]), max(self.a[c], self.b[c])
            k0 = math.ceil(lo / h)
            k1 = math.floor(hi / h)
            for k in range(k0, k1 + 1):
                t = (k * h - self.a[c]) / dc
                if 0.0 < t < 1.0:
                    crossings.add(t)
        ts = sorted(crossings)
        scale = 2.0**level
        out: dict[CellKey, tuple[float, float]] = {}
        for t0, t1 in zip(ts[:-1], ts[1:]):
            if t1 <= t0:
                continue
            mid = self.a + 0.5 * (t0 + t1) * self.direction
            key = tuple(int(math.floor(x * scale)) for x in mid)
            if key in out:
                continue
            mass, meas = self.cell_intersection(level, key)
            if meas > 0.0:
                out[key] = (mass, meas)
        return out


class AxisAlignedPatch(RectifiableComponent):
    """Axis-aligned m-dimensional rectangle with a piecewise-constant density.

    The patch extends from ``anchor`` along the coordinate axes listed in
    ``axes`` by ``sides``; the remaining coordinates stay fixed at the anchor.
    ``pieces`` is a list of (lo, hi, value) boxes in the local coordinates of
    the extended axes; the carrier is their (disjoint) union.  When omitted,
    the density is uniform over the whole patch.
    """

    def __init__(self, anchor, axes, sides, pieces=None):
        self.anchor = _as_vector(anchor)
        self.ambient_dim = self.anchor.size
        self.axes = tuple(int(a) for a in axes)
        if len(set(self.axes)) != len(self.axes):
            raise ValueError("axes must be distinct")
        if any(a < 0 or a >= self.ambient_dim for a in self.axes):
            raise ValueError("axis out of range")
        if list(self.axes) != sorted(self.axes):
            raise ValueError("axes must be listed in increasing order")
        self.sides = _as_vector(sides, len(self.axes))
        if np.any(self.sides <= 0):
            raise ValueError("side lengths must be positive")
        self.dimension = len(self.axes)
        if self.dimension == 0:
            raise ValueError("use AtomSet for zero-dimensional components")
        vol = float(np.prod(self.sides))
        if pieces is None:
            pieces = [(np.zeros(self.dimension), self.sides.copy(), 1.0 / vol)]
        self.piece_lo = np.array([_as_vector(p[0], self.dimension) for p in pieces])
        self.piece_hi = np.array([_as_vector(p[1], self.dimension) for p in pieces])
        self.piece_val = np.array([float(p[2]) for p in pieces])
        if np.any(self.piece_val <= 0):
            raise ValueError("density values must be strictly positive")
        if np.any(self.piece_lo < -MASS_RTOL) or np.any(self.piece_hi > self.sides + MASS_RTOL):
            raise ValueError("pieces must lie inside the patch")
        if np.any(self.piece_hi <= self.piece_lo):
            raise ValueError("pieces must have positive extent")
        vols = np.prod(self.piece_hi - self.piece_lo, axis=1)
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                inter = np.minimum(self.piece_hi[i], self.piece_hi[j]) - np.maximum(
                    self.piece_lo[i], self.piece_lo[j]
                )
                if np.all(inter > 0):
                    raise ValueError("density pieces overlap")
        mass = float(np.sum(self.piece_val * vols))
        if abs(mass - 1.0) > MASS_RTOL:
            raise ValueError(f"patch density integrates to {mass!r}, expected 1")
        self.match_tol = POINT_MATCH_RTOL * _scale_of(self.anchor, self.anchor + self._embed(self.sides))

    def _embed(self, local: np.ndarray) -> np.ndarray:
        out = np.zeros(self.ambient_dim)
        out[list(self.axes)] = local
        return out

    def global_piece_bounds(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Piece k as a degenerate box in ambient coordinates (lo == hi on fixed axes)."""
        lo = self.anchor.copy()
        hi = self.anchor.copy()
        lo[list(self.axes)] += self.piece_lo[k]
        hi[list(self.axes)] += self.piece_hi[k]
        return lo, hi

    def carrier_measure(self) -> float:
        return float(np.sum(np.prod(self.piece_hi - self.piece_lo, axis=1)))

    def entropy(self) -> float:
        vols = np.prod(self.piece_hi - self.piece_lo, axis=1)
        return float(-np.sum(self.piece_val * vols * np.log(self.piece_val)))

    def sample(self, rng, size):
        vols = np.prod(self.piece_hi - self.piece_lo, axis=1)
        masses = self.piece_val * vols
        masses = masses / masses.sum()
        piece = rng.choice(self.piece_val.size, size=size, p=masses)
        u = rng.random((size, self.dimension))
        local = self.piece_lo[piece] + u * (self.piece_hi[piece] - self.piece_lo[piece])
        pts = np.tile(self.anchor, (size, 1))
        pts[:, list(self.axes)] += local
        return pts

    def cell_intersection(self, level, index):
        h = 2.0**-level
        mass = 0.0
        meas = 0.0
        for k in range(self.piece_val.size):
            lo, hi = self.global_piece_bounds(k)
            vol = 1.0
            for c in range(self.ambient_dim):
                cl = index[c] * h
                cu = (index[c] + 1) * h
                if c in self.axes:
                    vol *= _interval_overlap(lo[c], hi[c], cl, cu)
                    if vol == 0.0:
                        break
                elif not (cl <= lo[c] < cu):
                    vol = 0.0
                    break
            if vol > 0.0:
                meas += vol
                mass += self.piece_val[k] * vol
        return mass, meas

    def cells_upper_bound(self, level):
        total = 0
        for k in range(self.piece_val.size):
            count = 1
            for ext in self.piece_hi[k] - self.piece_lo[k]:
                count *= int(math.ceil(ext * 2.0**level)) + 2
            total += count
        return total

    def cells(self, level):
        h = 2.0**-level
        scale = 2.0**level
        out: dict[CellKey, tuple[float, float]] = {}
        fixed_key = {
            c: int(math.floor(self.anchor[c] * scale))
            for c in range(self.ambient_dim)
            if c not in self.axes
        }
        for k in range(self.piece_val.size):
            lo, hi = self.global_piece_bounds(k)
            ranges = []
            for c in range(self.ambient_dim):
                if c in self.axes:
                    j0 = math.floor(lo[c] * scale)
                    j1 = math.ceil(hi[c] * scale) - 1
                    ranges.append(range(j0, j1 + 1))
                else:
                    ranges.append(range(fixed_key[c], fixed_key[c] + 1))
            for key in itertools.product(*ranges):
                vol = 1.0
                for c in self.axes:
                    vol *= _interval_overlap(lo[c], hi[c], key[c] * h, (key[c] + 1) * h)
                    if vol == 0.0:
                        break
                if vol <= 0.0:
                    continue
                mass, meas = out.get(key, (0.0, 0.0))
                out[key] = (mass + self.piece_val[k] * vol, meas + vol)
        return out


class Box(AxisAlignedPatch):
    """Full-dimensional rectangle [lo, hi) with piecewise-constant Lebesgue density."""

    def __init__(self, lo, hi, pieces=None):
        lo = _as_vector(lo)
        hi = _as_vector(hi, lo.size)
        super().__init__(anchor=lo, axes=range(lo.size), sides=hi - lo, pieces=pieces)


class MixtureComponent(RectifiableComponent):
    """Same-dimension components merged into one, with renormalized inner weights.

    The reference measure is the sum of the member reference measures; the
    density on member j's carrier is inner_weight[j] times the member density,
    so the entropy obeys the discrete/conditional chain rule.
    """

    def __init__(self, components: Sequence[RectifiableComponent], weights: Sequence[float]):
        comps = list(components)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if len(comps) != w.size or len(comps) < 1:
            raise ValueError("components and weights length mismatch")
        dims = {c.dimension for c in comps}
        if len(dims) != 1:
            raise ValueError("mixture members must share one dimension")
        ambs = {c.ambient_dim for c in comps}
        if len(ambs) != 1:
            raise ValueError("mixture members must share the ambient dimension")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > MASS_RTOL:
            raise ValueError("inner weights must be positive and sum to 1")
        self.members = tuple(comps)
        self.weights = w
        self.dimension = comps[0].dimension
        self.ambient_dim = comps[0].ambient_dim

    def entities(self):
        return list(self.members)

    def inner_weights(self):
        return self.weights

    def carrier_measure(self) -> float:
        return float(sum(c.carrier_measure() for c in self.members))

    def entropy(self) -> float:
        label = float(-np.sum(self.weights * np.log(self.weights)))
        return label + float(
            np.sum(self.weights * np.array([c.entropy() for c in self.members]))
        )

    def sample(self, rng, size):
        idx = rng.choice(len(self.members), size=size, p=self.weights / self.weights.sum())
        out = np.empty((size, self.ambient_dim))
        for j, comp in enumerate(self.members):
            sel = np.flatnonzero(idx == j)
            if sel.size:
                out[sel] = comp.sample(rng, sel.size)
        return out

    def cell_intersection(self, level, index):
        mass = 0.0
        meas = 0.0
        for wj, comp in zip(self.weights, self.members):
            m, v = comp.cell_intersection(level, index)
            mass += wj * m
            meas += v
        return mass, meas

    def cells_upper_bound(self, level):
        return sum(c.cells_upper_bound(level) for c in self.members)

    def cells(self, level):
        out: dict[CellKey, tuple[float, float]] = {}
        for wj, comp in zip(self.weights, self.members):
            for key, (m, v) in comp.cells(level).items():
                mass, meas = out.get(key, (0.0, 0.0))
                out[key] = (mass + wj * m, meas + v)
        return out


CATALOG_KINDS = (AtomSet, Segment, AxisAlignedPatch, MixtureComponent)


def require_catalog(component) -> RectifiableComponent:
    if not isinstance(component, CATALOG_KINDS):
        raise UnsupportedGeometry(f"not a catalog shape: {type(component).__name__}")
    if isinstance(component, MixtureComponent):
        for member in component.members:
            require_catalog(member)
    return component


# ---------------------------------------------------------------------------
# Positive-measure overlap detection between same-dimension carriers
# ---------------------------------------------------------------------------

def _segments_of(component) -> list[tuple[np.ndarray, np.ndarray]]:
    """1-dimensional carriers as a list of (a, b) segments."""
    if isinstance(component, Segment):
        return [(component.a, component.b)]
    segs = []
    for k in range(component.piece_val.size):
        lo, hi = component.global_piece_bounds(k)
        segs.append((lo, hi))
    return segs


def _segment_pair_overlaps(a1, b1, a2, b2, tol: float) -> bool:
    d1 = b1 - a1
    len1 = float(np.linalg.norm(d1))
    # both endpoints of segment 2 must lie on the line of segment 1
    for p in (a2, b2):
        t = float(np.dot(p - a1, d1)) / (len1 * len1)
        residual = np.linalg.norm(p - a1 - t * d1)
        if residual > tol:
            return False
    t2a = float(np.dot(a2 - a1, d1)) / (len1 * len1)
    t2b = float(np.dot(b2 - a1, d1)) / (len1 * len1)
    lo, hi = min(t2a, t2b), max(t2a, t2b)
    return _interval_overlap(0.0, 1.0, lo, hi) * len1 > tol


def _rects_overlap(p1: AxisAlignedPatch, p2: AxisAlignedPatch, tol: float) -> bool:
    if set(p1.axes) != set(p2.axes):
        return False  # intersection has lower dimension, H^m-null
    for c in range(p1.ambient_dim):
        if c not in p1.axes and abs(p1.anchor[c] - p2.anchor[c]) > tol:
            return False
    for i in range(p1.piece_val.size):
        lo1, hi1 = p1.global_piece_bounds(i)
        for j in range(p2.piece_val.size):
            lo2, hi2 = p2.global_piece_bounds(j)
            vol = 1.0
            for c in p1.axes:
                vol *= _interval_overlap(lo1[c], hi1[c], lo2[c], hi2[c])
            if vol > tol ** len(p1.axes):
                return True
    return False


def carriers_overlap(c1: RectifiableComponent, c2: RectifiableComponent) -> bool:
    """True when two same-dimension carriers share a positive-H^m set."""
    if c1.dimension != c2.dimension:
        return False
    tol = SEGMENT_MATCH_RTOL
    if isinstance(c1, AtomSet) and isinstance(c2, AtomSet):
        t = max(c1.match_tol, c2.match_tol)
        for p in c1.points:
            if np.any(np.max(np.abs(c2.points - p), axis=1) <= t):
                return True
        return False
    if c1.dimension == 1:
        for a1, b1 in _segments_of(c1):
            for a2, b2 in _segments_of(c2):
                if _segment_pair_overlaps(a1, b1, a2, b2, tol):
                    return True
        return False
    if isinstance(c1, AxisAlignedPatch) and isinstance(c2, AxisAlignedPatch):
        return _rects_overlap(c1, c2, tol)
    raise UnsupportedGeometry(
        f"no overlap rule for {type(c1).__name__} vs {type(c2).__name__}"
    )


def check_disjoint(components: Iterable[RectifiableComponent]) -> None:
    """Reject any positive-measure overlap among same-dimension atomic carriers."""
    flat: list[RectifiableComponent] = []
    for comp in components:
        flat.extend(comp.entities())
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            if flat[i].dimension == flat[j].dimension and carriers_overlap(flat[i], flat[j]):
                raise OverlappingCarriers(
                    f"{type(flat[i]).__name__} and {type(flat[j]).__name__} overlap "
                    f"on a positive H^{flat[i].dimension} set"
                )
