"""Weak, strong and double typicality; schedules and dimension intervals.

All operations here are pure functions of their arguments.  Weak scores are
accumulated with ``math.fsum`` (exactly rounded), so they are exactly
invariant under permutations of the sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadExponent
from .measure import LabeledSequence, StratifiedMeasure, log_density_batch, mixture_entropy

# Absolute slack applied to every weak-typicality threshold so that scores
# that equal the entropy in exact arithmetic (e.g. constant densities, or
# exactly balanced counts at delta = 0) are classified as typical despite
# float rounding.  Genuine score gaps in the catalog are many orders larger.
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Schedule:
    """Per-n typicality parameters under the eta-convention.

    eta_n = n^(-1/2+xi), delta_prime_n = -|E_Y| eta_n ln eta_n, and the
    Hoeffding budget epsilon_n = 2 |E_Y| exp(-2 n eta_n^2).
    """

    n: int
    xi: float
    alphabet_size: int
    eta: float
    delta_prime: float
    epsilon: float


def schedule(n: int, xi: float, alphabet_size: int) -> Schedule:
    if not 0.0 < xi < 0.5:
        raise BadExponent(f"xi must lie in (0, 1/2), got {xi!r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    eta = float(n) ** (-0.5 + xi)
    delta_prime = -alphabet_size * eta * math.log(eta)
    epsilon = 2.0 * alphabet_size * math.exp(-2.0 * n * eta * eta)
    return Schedule(
        n=n,
        xi=xi,
        alphabet_size=alphabet_size,
        eta=eta,
        delta_prime=delta_prime,
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class TypicalityParams:
    """Weak tolerance (nats) bundled with the strong-typicality schedule."""

    delta: float
    schedule: Schedule

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be > 0")


@dataclass(frozen=True)
class EmpiricalType:
    """Empirical distribution of a label sequence."""

    counts: np.ndarray  # (k,) int64
    n: int

    @property
    def pmf(self) -> np.ndarray:
        return self.counts / self.n


def empirical_type(labels, alphabet_size: int) -> EmpiricalType:
    y = np.asarray(labels, dtype=np.int64)
    if y.size < 1:
        raise ValueError("need at least one label")
    if y.min() < 0 or y.max() >= alphabet_size:
        raise ValueError("label outside alphabet")
    counts = np.bincount(y, minlength=alphabet_size).astype(np.int64)
    return EmpiricalType(counts=counts, n=int(y.size))


def weak_log_score(measure: StratifiedMeasure, seq: LabeledSequence) -> float:
    """-(1/n) sum_i ln f(x_i); +inf when any point is off-support."""
    logf = log_density_batch(measure, seq.points)
    if np.any(np.isneginf(logf)):
        return math.inf
    return -math.fsum(logf.tolist()) / seq.n


def is_weakly_typical(measure: StratifiedMeasure, seq: LabeledSequence, delta: float) -> bool:
    if delta < 0:
        raise ValueError("delta must be >= 0")
    score = weak_log_score(measure, seq)
    if not math.isfinite(score):
        return False
    h = mixture_entropy(measure).total
    return abs(score - h) <= delta + BOUNDARY_TOL


def type_is_strongly_typical(ptype: EmpiricalType, Q, eta: float) -> bool:
    """P << Q and |P(a) - Q(a)| < eta for every label a (strict, per the definition).

    Compared in count units, |N(a;y) - n Q(a)| < n eta, which keeps the
    boundary exact whenever n Q(a) and n eta are exactly representable.
    """
    q = np.asarray(Q, dtype=float)
    if q.shape != ptype.counts.shape:
        raise ValueError("type and Q alphabet sizes differ")
    if np.any((q == 0.0) & (ptype.counts > 0)):
        return False
    n = ptype.n
    return bool(np.all(np.abs(ptype.counts - n * q) < n * eta))


def is_strongly_typical(labels, Q, eta: float) -> bool:
    if eta <= 0:
        raise ValueError("eta must be > 0")
    q = np.asarray(Q, dtype=float)
    return type_is_strongly_typical(empirical_type(labels, q.size), q, eta)


def stratum_dimension(labels, dims) -> int:
    """m(y) = sum_j m_{y_j}, the Hausdorff dimension of the product stratum."""
    y = np.asarray(labels, dtype=np.int64)
    m = np.asarray(dims, dtype=np.int64)
    return int(m[y].sum())


def dimension_interval(n: int, xi: float, q, dims, mode: str = "derived"):
    """Concentration interval for the dimension of a strongly typical stratum.

    ``literal`` uses half-width n^(1/2+xi); ``derived`` multiplies by
    sum_i m_i, which is what the per-label count bounds
    |N(i;y) - n q_i| <= n eta_n actually give after weighting by m_i.
    With a single stratum every sequence has the exact dimension n*m_1.
    """
    q = np.asarray(q, dtype=float)
    m = np.asarray(dims, dtype=float)
    if q.shape != m.shape:
        raise ValueError("q and dims must align")
    center = n * float(np.sum(q * m))
    if q.size == 1:
        return center, center
    if mode == "literal":
        half = float(n) ** (0.5 + xi)
    elif mode == "derived":
        half = float(n) ** (0.5 + xi) * float(np.sum(m))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return center - half, center + half


@dataclass(frozen=True)
class TVBound:
    """Entropy continuity bound |H(P)-H(Q)| <= -theta ln(theta/|E_Y|).

    ``holds`` is None when theta > 1/2 (the bound does not apply there).
    """

    theta: float
    bound: float
    holds: bool | None


def discrete_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def entropy_tv_bound(P, Q) -> TVBound:
    p = np.asarray(P, dtype=float)
    q = np.asarray(Q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("pmf shapes differ")
    theta = float(np.sum(np.abs(p - q)))
    if theta == 0.0:
        return TVBound(theta=0.0, bound=0.0, holds=True)
    bound = -theta * math.log(theta / p.size)
    if theta > 0.5:
        return TVBound(theta=theta, bound=bound, holds=None)
    gap = abs(discrete_entropy(p) - discrete_entropy(q))
    return TVBound(theta=theta, bound=bound, holds=bool(gap <= bound + BOUNDARY_TOL))
