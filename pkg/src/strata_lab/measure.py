"""Stratified measures in standard form: mixtures of rectifiable components.

A stratified measure is a convex combination sum_i q_i rho_i of catalog
components whose carrier dimensions increase strictly with i. The reference
measure is mu = sum_i H^{m_i} restricted to carrier i; the mixture density
w.r.t. mu is q_i times the component density on carrier i, which makes the
entropy obey the chain rule H(X) = H(Y) + H(X|Y) with Y the stratum label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import assign_points, pack_components
from .errors import (
    AmbientMismatch,
    InfiniteScore,
    UnsupportedGeometry,
    WeightSumMismatch,
    ZeroWeight,
)
from .geometry import (
    MixtureComponent,
    RectifiableComponent,
    check_disjoint,
    require_catalog,
)
from .randomstream import RandomStream

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class LabeledSequence:
    """An i.i.d. draw (x_1..x_n) with 0-based stratum labels y_i = pi(x_i)."""

    points: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,) int64

    def __post_init__(self):
        if self.points.ndim != 2 or self.labels.shape != (self.points.shape[0],):
            raise ValueError("points must be (n, d) with matching labels (n,)")

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class MixtureEntropy:
    """Chain-rule decomposition H(X) = H(Y) + H(X|Y), all in nats."""

    total: float
    label: float
    conditional: float


class StratifiedMeasure:
    """Standard-form mixture; build instances with :func:`build_standard_form`."""

    def __init__(self, components, weights, *, _validated=False):
        self.components: tuple[RectifiableComponent, ...] = tuple(components)
        self.weights = np.asarray(weights, dtype=float).reshape(-1)
        if len(self.components) != self.weights.size or not self.components:
            raise ValueError("components and weights length mismatch")
        dims = [c.dimension for c in self.components]
        if any(d2 <= d1 for d1, d2 in zip(dims, dims[1:])):
            raise ValueError("component dimensions must increase strictly")
        ambient = {c.ambient_dim for c in self.components}
        if len(ambient) != 1:
            raise AmbientMismatch(f"ambient dimensions differ: {sorted(ambient)}")
        if not _validated:
            for c in self.components:
                require_catalog(c)
            check_disjoint(self.components)
        self.ambient_dim = self.components[0].ambient_dim
        self.dims = np.asarray(dims, dtype=np.int64)
        self._packed = None
        self._component_packed: dict[int, object] = {}
        self._entropy: MixtureEntropy | None = None

    @property
    def k(self) -> int:
        return len(self.components)

    def packed(self):
        if self._packed is None:
            self._packed = pack_components(list(zip(self.weights, self.components)))
        return self._packed

    def component_packed(self, i: int):
        """Packed catalog of component i alone (density w.r.t. its own mu_i)."""
        if i not in self._component_packed:
            self._component_packed[i] = pack_components([(1.0, self.components[i])])
        return self._component_packed[i]

    def reference_mass(self) -> float:
        """mu(E) = sum of carrier measures."""
        return float(sum(c.carrier_measure() for c in self.components))


def build_standard_form(component_specs) -> StratifiedMeasure:
    """Assemble a standard-form measure from ``[(weight, component), ...]``.

    Components sharing a dimension are merged into one mixture component with
    renormalized inner weights, so the output dimensions increase strictly.

    Raises
    ------
    ZeroWeight, WeightSumMismatch, AmbientMismatch, OverlappingCarriers,
    UnsupportedGeometry
    """
    specs = [(float(w), c) for w, c in component_specs]
    if not specs:
        raise ValueError("need at least one component")
    for w, _ in specs:
        if w <= 0.0:
            raise ZeroWeight(f"weight {w!r} is not strictly positive")
    total = math.fsum(w for w, _ in specs)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise WeightSumMismatch(f"weights sum to {total!r}, expected 1")
    for _, c in specs:
        require_catalog(c)
    ambient = {c.ambient_dim for _, c in specs}
    if len(ambient) != 1:
        raise AmbientMismatch(f"ambient dimensions differ: {sorted(ambient)}")
    check_disjoint([c for _, c in specs])

    by_dim: dict[int, list[tuple[float, RectifiableComponent]]] = {}
    for w, c in specs:
        by_dim.setdefault(c.dimension, []).append((w, c))
    components, weights = [], []
    for dim in sorted(by_dim):
        group = by_dim[dim]
        q = sum(w for w, _ in group)
        if len(group) == 1:
            components.append(group[0][1])
        else:
            inner = [w / q for w, _ in group]
            members = []
            for _, c in group:
                # flatten pre-merged mixtures instead of nesting them
                if isinstance(c, MixtureComponent):
                    raise UnsupportedGeometry("pass atomic components, not mixtures")
                members.append(c)
            components.append(MixtureComponent(members, inner))
        weights.append(q)
    return StratifiedMeasure(components, weights, _validated=True)


# ---------------------------------------------------------------------------
# densities and sampling
# ---------------------------------------------------------------------------

def label_points(measure: StratifiedMeasure, points) -> np.ndarray:
    """0-based component index per point, -1 off every carrier."""
    labels, _ = assign_points(measure.packed(), np.atleast_2d(np.asarray(points, float)))
    return labels.astype(np.int64)

def log_density_batch(measure: StratifiedMeasure, points) -> np.ndarray:
    """ln(q_i f_i(x)) per point; -inf off support (total function)."""
    _, dens = assign_points(measure.packed(), np.atleast_2d(np.asarray(points, float)))
    with np.errstate(divide="ignore"):
        return np.log(dens)

def log_density(measure: StratifiedMeasure, point) -> float:
    return float(log_density_batch(measure, np.asarray(point, float).reshape(1, -1))[0])


def component_log_density_batch(measure: StratifiedMeasure, points, labels) -> np.ndarray:
    """ln of d(rho_{y_i})/d(mu_{y_i}) at each point, for given labels."""
    pts = np.atleast_2d(np.asarray(points, float))
    labels = np.asarray(labels)
    out = np.zeros(pts.shape[0])
    for i in range(measure.k):
        sel = np.flatnonzero(labels == i)
        if sel.size:
            _, dens = assign_points(measure.component_packed(i), pts[sel])
            with np.errstate(divide="ignore"):
                out[sel] = np.log(dens)
    return out


def sample_labels(measure: StratifiedMeasure, rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.choice(measure.k, size=n, p=measure.weights / measure.weights.sum())


def sample_points_for_labels(
    measure: StratifiedMeasure, rng: np.random.Generator, labels: np.ndarray
) -> np.ndarray:
    pts = np.empty((labels.size, measure.ambient_dim))
    for i in range(measure.k):
        sel = np.flatnonzero(labels == i)
        if sel.size:
            pts[sel] = measure.components[i].sample(rng, sel.size)
    return pts


def sample(measure: StratifiedMeasure, stream: RandomStream, n: int) -> LabeledSequence:
    """Draw n i.i.d. labeled points; deterministic given (seed, stream id)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream.generator()
    labels = sample_labels(measure, rng, n)
    points = sample_points_for_labels(measure, rng, labels)
    return LabeledSequence(points=points, labels=labels.astype(np.int64))


# ---------------------------------------------------------------------------
# entropies
# ---------------------------------------------------------------------------

def component_entropy(component: RectifiableComponent) -> float:
    """H_{mu_i}(rho_i) = -∫ f ln f dH^m, exact for catalog shapes."""
    require_catalog(component)
    return component.entropy()


def mixture_entropy(measure: StratifiedMeasure) -> MixtureEntropy:
    """Exact chain-rule entropies (total, label, conditional)."""
    if measure._entropy is None:
        q = measure.weights
        h_label = float(-np.sum(q * np.log(q)))
        h_cond = float(np.sum(q * np.array([component_entropy(c) for c in measure.components])))
        measure._entropy = MixtureEntropy(
            total=h_label + h_cond, label=h_label, conditional=h_cond
        )
    return measure._entropy


def score_moments(measure: StratifiedMeasure) -> tuple[float, float]:
    """Exact mean and variance of the score -ln(d rho/d mu) under rho.

    The density is piecewise constant, so both moments are finite sums over
    (entity, piece) cells of mass * (-ln value)^p.
    """
    packed = measure.packed()
    terms: list[tuple[float, float]] = []  # (probability mass, density value)
    from ._kernels.packing import KIND_ATOMS, KIND_RECT, KIND_SEGMENT

    for e in range(packed.n_entities):
        w = float(packed.weight[e])
        g = int(packed.geo[e])
        k = int(packed.kind[e])
        if k == KIND_ATOMS:
            for a in range(int(packed.atom_off[g]), int(packed.atom_off[g + 1])):
                v = w * float(packed.atom_pmf[a])
                terms.append((v, v))
        elif k == KIND_SEGMENT:
            off = int(packed.seg_voff[g])
            npieces = int(packed.seg_voff[g + 1]) - off
            boff = off + g
            length = math.sqrt(float(packed.seg_len2[g]))
            for j in range(npieces):
                dt = float(packed.seg_breaks[boff + j + 1] - packed.seg_breaks[boff + j])
                val = float(packed.seg_vals[off + j])
                terms.append((w * val * dt * length, w * val))
        elif k == KIND_RECT:
            for p in range(int(packed.rect_poff[g]), int(packed.rect_poff[g + 1])):
                ext = packed.rpiece_hi[p] - packed.rpiece_lo[p]
                vol = float(np.prod(ext[np.nonzero(packed.rect_axis[g])]))
                val = float(packed.rpiece_val[p])
                terms.append((w * val * vol, w * val))
    mean = math.fsum(m * -math.log(v) for m, v in terms)
    second = math.fsum(m * math.log(v) ** 2 for m, v in terms)
    return mean, max(0.0, second - mean * mean)


def entropy_monte_carlo(
    measure: StratifiedMeasure, stream: RandomStream, n: int
) -> tuple[float, float]:
    """Sample mean and standard error of the score over n i.i.d. draws.

    Raises :class:`InfiniteScore` if any draw lands off-support, which signals
    an inconsistency between the sampler and the density.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    seq = sample(measure, stream, n)
    scores = -log_density_batch(measure, seq.points)
    if not np.all(np.isfinite(scores)):
        raise InfiniteScore("sampled point has zero density")
    est = float(np.mean(scores))
    se = float(np.std(scores, ddof=1) / math.sqrt(n))
    return est, se
