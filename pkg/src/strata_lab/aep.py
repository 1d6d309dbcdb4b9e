"""Monte Carlo and exhaustive estimators for typical sets and strata.

Volume estimation uses the importance-sampling identity
mu(A) = E_rho[1_A / f], valid because the density f is strictly positive on
the support; the catalog's piecewise-constant densities keep the weights
bounded, so plain CLT standard errors are reported (no bootstrap).

Trials are embarrassingly parallel: each worker owns a stream derived from
(seed, worker id) and partial results are merged in fixed worker order, so a
run is bit-reproducible for a given worker count.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeights, TooLarge
from ._kernels.packing import KIND_ATOMS
from .measure import (
    LabeledSequence,
    StratifiedMeasure,
    component_log_density_batch,
    log_density_batch,
    mixture_entropy,
    sample_labels,
    sample_points_for_labels,
)
from .randomstream import RandomStream
from .typicality import (
    BOUNDARY_TOL,
    EmpiricalType,
    Schedule,
    empirical_type,
    is_strongly_typical,
    is_weakly_typical,
    stratum_dimension,
    weak_log_score,
)

_CHUNK_POINTS = 1 << 20  # per-worker block size, fixed so runs are reproducible


@dataclass(frozen=True)
class EstimateWithCI:
    value: float
    standard_error: float
    trials: int
    method: str  # monte-carlo | importance-sampling | exhaustive

    def __post_init__(self):
        if self.standard_error < 0:
            raise ValueError("standard error must be >= 0")
        if self.method == "exhaustive" and self.standard_error != 0.0:
            raise ValueError("exhaustive estimates carry no sampling error")


@dataclass(frozen=True)
class StratumReport:
    """Per-stratum estimates for a strongly typical label sequence.

    Both estimates are reported on the natural-log scale: ``log_volume``
    estimates ln H^{m(y)}(T(y)) and ``log_probability`` estimates
    ln rho^(n)(T(y)).
    """

    labels: np.ndarray
    ptype: EmpiricalType
    dimension: int
    log_volume: EstimateWithCI
    log_probability: EstimateWithCI


def _worker_plan(trials: int, threads: int) -> list[int]:
    threads = max(1, int(threads))
    base, extra = divmod(trials, threads)
    return [base + (1 if w < extra else 0) for w in range(threads)]


def _run_workers(stream: RandomStream, plan, func):
    """func(worker_rng, worker_trials) per worker; results in worker order."""
    jobs = [(w, t) for w, t in enumerate(plan) if t > 0]
    if len(jobs) == 1:
        w, t = jobs[0]
        return [func(stream.child(w).generator(), t)]
    with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
        futures = [pool.submit(func, stream.child(w).generator(), t) for w, t in jobs]
        return [f.result() for f in futures]


def _trial_indicators(measure, rng, trials, n, delta, eta=None):
    """Weak (and optionally strong) typicality indicators per trial."""
    h = mixture_entropy(measure).total
    q = measure.weights
    weak = np.empty(trials, dtype=bool)
    strong = np.empty(trials, dtype=bool)
    lnw = np.empty(trials)
    done = 0
    chunk = max(1, _CHUNK_POINTS // n)
    while done < trials:
        t = min(chunk, trials - done)
        labels = sample_labels(measure, rng, t * n)
        pts = sample_points_for_labels(measure, rng, labels)
        logf = log_density_batch(measure, pts).reshape(t, n)
        w = -logf.sum(axis=1)
        scores = w / n
        weak[done : done + t] = np.abs(scores - h) <= delta + BOUNDARY_TOL
        lnw[done : done + t] = w
        if eta is not None:
            lab = labels.reshape(t, n)
            counts = np.zeros((t, measure.k))
            for i in range(measure.k):
                counts[:, i] = (lab == i).sum(axis=1)
            strong[done : done + t] = np.all(
                np.abs(counts - n * q) < n * eta, axis=1
            )
        done += t
    return weak, strong if eta is not None else None, lnw


def estimate_typical_probability(
    measure: StratifiedMeasure,
    n: int,
    delta: float,
    trials: int,
    stream: RandomStream,
    threads: int = 1,
) -> EstimateWithCI:
    """Fraction of i.i.d. length-n sequences that are weakly delta-typical."""
    if trials < 100:
        raise ValueError("trials must be >= 100")
    plan = _worker_plan(trials, threads)

    def work(rng, t):
        weak, _, _ = _trial_indicators(measure, rng, t, n, delta)
        return int(weak.sum())

    hits = sum(_run_workers(stream, plan, work))
    p = hits / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return EstimateWithCI(value=p, standard_error=se, trials=trials, method="monte-carlo")


def _log_mean_and_se(lnw_hits: np.ndarray, trials: int) -> tuple[float, float]:
    """ln(mean of weights) and delta-method SE of the log, from hit weights only."""
    if lnw_hits.size == 0:
        raise DegenerateWeights("no typical draw observed")
    m = float(np.max(lnw_hits))
    s1 = float(np.sum(np.exp(lnw_hits - m)))
    s2 = float(np.sum(np.exp(2.0 * (lnw_hits - m))))
    log_mean = m + math.log(s1) - math.log(trials)
    if trials < 2:
        return log_mean, 0.0
    # r = E[w^2]/E[w]^2 = S2*T/S1^2; SE(ln mean) = sqrt((r-1)/(T-1))
    r = s2 * trials / (s1 * s1)
    se = math.sqrt(max(r - 1.0, 0.0) / (trials - 1))
    return log_mean, se


def estimate_typical_volume(
    measure: StratifiedMeasure,
    n: int,
    delta: float,
    trials: int,
    stream: RandomStream,
    threads: int = 1,
) -> EstimateWithCI:
    """Importance-sampling estimate of mu^(n)(W_delta), reported as ln volume.

    Each typical draw contributes the weight prod_i f(x_i)^(-1); the mean over
    all trials estimates the volume.
    """
    if trials < 10**3:
        raise ValueError("trials must be >= 1000")
    plan = _worker_plan(trials, threads)

    def work(rng, t):
        weak, _, lnw = _trial_indicators(measure, rng, t, n, delta)
        return lnw[weak]

    parts = _run_workers(stream, plan, work)
    lnw_hits = np.concatenate(parts) if parts else np.empty(0)
    log_mean, se = _log_mean_and_se(lnw_hits, trials)
    return EstimateWithCI(
        value=log_mean, standard_error=se, trials=trials, method="importance-sampling"
    )


def stratum_report(
    measure: StratifiedMeasure,
    labels,
    delta: float,
    sched: Schedule,
    trials: int,
    stream: RandomStream,
    threads: int = 1,
) -> StratumReport:
    """Conditional importance sampling on the stratum of a strongly typical y.

    Draws x_i ~ rho_{y_i}; the indicator keeps weakly typical sequences and
    the weight prod_i (d rho_{y_i}/d mu_{y_i})(x_i)^(-1) turns the surviving
    mass into the H^{m(y)} volume of the doubly typical stratum.
    """
    y = np.asarray(labels, dtype=np.int64)
    n = y.size
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if not is_strongly_typical(y, measure.weights, sched.eta):
        raise ValueError("label sequence is not strongly typical at this schedule")
    h = mixture_entropy(measure).total
    ln_q_total = float(np.sum(np.log(measure.weights[y])))
    plan = _worker_plan(trials, threads)

    def work(rng, t):
        hits = []
        nhit = 0
        done = 0
        chunk = max(1, _CHUNK_POINTS // n)
        while done < t:
            tt = min(chunk, t - done)
            tiled = np.tile(y, tt)
            pts = sample_points_for_labels(measure, rng, tiled)
            logf = component_log_density_batch(measure, pts, tiled).reshape(tt, n)
            lnw = -logf.sum(axis=1)
            scores = (lnw - ln_q_total) / n
            weak = np.abs(scores - h) <= delta + BOUNDARY_TOL
            hits.append(lnw[weak])
            nhit += int(weak.sum())
            done += tt
        return np.concatenate(hits), nhit

    parts = _run_workers(stream, plan, work)
    lnw_hits = np.concatenate([p[0] for p in parts])
    nhit = sum(p[1] for p in parts)
    log_volume, se = _log_mean_and_se(lnw_hits, trials)
    frac = nhit / trials
    if frac > 0:
        p_se = math.sqrt(frac * (1 - frac) / trials) / frac
        log_prob = EstimateWithCI(
            value=ln_q_total + math.log(frac),
            standard_error=p_se,
            trials=trials,
            method="importance-sampling",
        )
    else:
        log_prob = EstimateWithCI(
            value=-math.inf, standard_error=0.0, trials=trials, method="importance-sampling"
        )
    ptype = empirical_type(y, measure.k)
    return StratumReport(
        labels=y,
        ptype=ptype,
        dimension=stratum_dimension(y, measure.dims),
        log_volume=EstimateWithCI(
            value=log_volume, standard_error=se, trials=trials, method="importance-sampling"
        ),
        log_probability=log_prob,
    )


def estimate_stratum_volume(
    measure: StratifiedMeasure,
    labels,
    delta: float,
    sched: Schedule,
    trials: int,
    stream: RandomStream,
    threads: int = 1,
) -> EstimateWithCI:
    """ln H^{m(y)}(T(y)) for a strongly typical label sequence y."""
    return stratum_report(measure, labels, delta, sched, trials, stream, threads).log_volume


def estimate_tv_defect(
    measure: StratifiedMeasure,
    n: int,
    delta: float,
    xi: float,
    trials: int,
    stream: RandomStream,
    threads: int = 1,
) -> EstimateWithCI:
    """Monte Carlo estimate of rho^(n)((T_{delta, delta'_n})^c).

    This equals the total-variation distance between rho^(n) and its
    restriction to the doubly typical set; a draw fails when it is not weakly
    typical or its labels are not strongly typical.
    """
    from .typicality import schedule as make_schedule

    if trials < 100:
        raise ValueError("trials must be >= 100")
    sched = make_schedule(n, xi, measure.k)
    plan = _worker_plan(trials, threads)

    def work(rng, t):
        weak, strong, _ = _trial_indicators(measure, rng, t, n, delta, eta=sched.eta)
        return int((~(weak & strong)).sum())

    fails = sum(_run_workers(stream, plan, work))
    p = fails / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return EstimateWithCI(value=p, standard_error=se, trials=trials, method="monte-carlo")


def type_symmetry_property(
    measure: StratifiedMeasure,
    seq: LabeledSequence,
    permutation,
    delta: float = 0.1,
    eta: float | None = None,
) -> bool:
    """Pathwise check that permuting a sequence permutes its typicality data.

    Verifies 1_{T(y)}(x) = 1_{T(sigma y)}(sigma x) and the exact equality of
    weak scores; both follow from permutation invariance of the product
    density and equivariance of the label projection.
    """
    sigma = np.asarray(permutation, dtype=np.int64)
    if sorted(sigma.tolist()) != list(range(seq.n)):
        raise ValueError("not a permutation of range(n)")
    if eta is None:
        from .typicality import schedule as make_schedule

        eta = make_schedule(seq.n, 0.1, measure.k).eta
    permuted = LabeledSequence(points=seq.points[sigma], labels=seq.labels[sigma])
    score_equal = weak_log_score(measure, seq) == weak_log_score(measure, permuted)

    def doubly(s: LabeledSequence) -> bool:
        return is_weakly_typical(measure, s, delta) and is_strongly_typical(
            s.labels, measure.weights, eta
        )

    return bool(score_equal and doubly(seq) == doubly(permuted))


# ---------------------------------------------------------------------------
# exact enumeration for discrete measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExhaustiveResult:
    typical_count: int
    probability: float
    volume: float  # counting-measure volume, equals typical_count


def _atom_probabilities(measure: StratifiedMeasure) -> np.ndarray:
    packed = measure.packed()
    if not np.all(packed.kind == KIND_ATOMS):
        raise ValueError("exhaustive oracle requires a purely atomic measure")
    probs = []
    for e in range(packed.n_entities):
        g = int(packed.geo[e])
        w = float(packed.weight[e])
        probs.extend(w * packed.atom_pmf[int(packed.atom_off[g]) : int(packed.atom_off[g + 1])])
    return np.asarray(probs)


def _compositions(n: int, k: int):
    if k == 1:
        yield (n,)
        return
    for head in range(n + 1):
        for rest in _compositions(n - head, k - 1):
            yield (head, *rest)


def exhaustive_oracle(measure: StratifiedMeasure, n: int, delta: float) -> ExhaustiveResult:
    """Exact |W|, rho^(n)(W) and mu^(n)(W) for an atomic measure.

    Enumerates by type: the weak score depends on a sequence only through its
    symbol counts, so the full product space is covered exactly with
    multinomial multiplicities.
    """
    p = _atom_probabilities(measure)
    a = p.size
    if a**n > 10**7:
        raise TooLarge(f"{a}^{n} sequences exceed the enumeration budget")
    h = mixture_entropy(measure).total
    neglog = -np.log(p)
    count = 0
    prob = 0.0
    for counts in _compositions(n, a):
        score = float(np.dot(counts, neglog)) / n
        if abs(score - h) <= delta + BOUNDARY_TOL:
            mult = math.factorial(n)
            for c in counts:
                mult //= math.factorial(c)
            count += mult
            prob += mult * float(np.prod(p**np.asarray(counts)))
    return ExhaustiveResult(typical_count=count, probability=prob, volume=float(count))


# ---------------------------------------------------------------------------
# strongly typical label sampling and the tightness diagnostic
# ---------------------------------------------------------------------------

def sample_strongly_typical_labels(
    measure: StratifiedMeasure,
    n: int,
    sched: Schedule,
    count: int,
    stream: RandomStream,
    max_tries: int = 10**5,
) -> list[np.ndarray]:
    """Draw label sequences from the measure's own label process, keeping the
    strongly typical ones (rejection sampling)."""
    rng = stream.generator()
    out: list[np.ndarray] = []
    tries = 0
    while len(out) < count:
        if tries >= max_tries:
            raise RuntimeError("strongly typical labels are too rare at this schedule")
        y = sample_labels(measure, rng, n).astype(np.int64)
        if is_strongly_typical(y, measure.weights, sched.eta):
            out.append(y)
        tries += 1
    return out


def ln_strongly_typical_count(n: int, q, eta: float) -> float:
    """Exact ln |A^{(n)}| by enumerating strongly typical count vectors."""
    q = np.asarray(q, dtype=float)
    k = q.size
    ranges = []
    for a in range(k - 1):
        lo = max(0, math.floor(n * (q[a] - eta)) + 1)
        hi = min(n, math.ceil(n * (q[a] + eta)) - 1)
        ranges.append(range(lo, hi + 1))
    terms = []
    for head in itertools.product(*ranges) if k > 1 else [()]:
        last = n - sum(head)
        counts = (*head, last)
        if last < 0 or last > n:
            continue
        if not all(abs(c / n - qa) < eta for c, qa in zip(counts, q)):
            continue
        ln_mult = math.lgamma(n + 1) - sum(math.lgamma(c + 1) for c in counts)
        terms.append(ln_mult)
    if not terms:
        return -math.inf
    m = max(terms)
    return m + math.log(math.fsum(math.exp(t - m) for t in terms))


@dataclass(frozen=True)
class TightnessReport:
    """Fraction of sampled strongly typical y whose per-stratum volume rate
    exceeds H(X|Y) - epsilon + delta + delta'_n, and the growth rate of the
    estimated count of such y. Diagnostic only; the underlying statement is
    a limsup, so no finite-n gate is claimed."""

    epsilon: float
    threshold: float
    reports: list[StratumReport]
    exceeds: list[bool]
    fraction_exceeding: float
    ln_typical_count: float
    log_count_rate: float  # (1/n) ln of the estimated |B_epsilon|


def tightness_diagnostic(
    measure: StratifiedMeasure,
    n: int,
    delta: float,
    xi: float,
    epsilon: float,
    sampled_types: int,
    stream: RandomStream,
    trials: int = 2000,
    threads: int = 1,
) -> TightnessReport:
    from .typicality import schedule as make_schedule

    if sampled_types < 10:
        raise ValueError("sampled_types must be >= 10")
    sched = make_schedule(n, xi, measure.k)
    h_cond = mixture_entropy(measure).conditional
    threshold = h_cond - epsilon + delta + sched.delta_prime
    ys = sample_strongly_typical_labels(measure, n, sched, sampled_types, stream.child(0))
    reports = []
    exceeds = []
    for i, y in enumerate(ys):
        rep = stratum_report(measure, y, delta, sched, trials, stream.child(i + 1), threads)
        reports.append(rep)
        exceeds.append(bool(rep.log_volume.value / n > threshold))
    frac = float(np.mean(exceeds)) if exceeds else 0.0
    ln_a = ln_strongly_typical_count(n, measure.weights, sched.eta)
    ln_b = (ln_a + math.log(frac)) if frac > 0 else -math.inf
    return TightnessReport(
        epsilon=epsilon,
        threshold=threshold,
        reports=reports,
        exceeds=exceeds,
        fraction_exceeding=frac,
        ln_typical_count=ln_a,
        log_count_rate=ln_b / n if math.isfinite(ln_b) else -math.inf,
    )


@dataclass(frozen=True)
class AdjacentTypeDiscrepancy:
    """ln rho^(n)(T(y)) for a modal strongly typical type and an adjacent one
    (total-variation distance 2/n between the types). No bound is claimed."""

    base_counts: tuple[int, ...]
    adjacent_counts: tuple[int, ...]
    base_log_prob: EstimateWithCI
    adjacent_log_prob: EstimateWithCI


def adjacent_type_discrepancy(
    measure: StratifiedMeasure,
    n: int,
    delta: float,
    xi: float,
    trials: int,
    stream: RandomStream,
    threads: int = 1,
) -> AdjacentTypeDiscrepancy:
    from .typicality import schedule as make_schedule

    if measure.k < 2:
        raise ValueError("needs at least two strata")
    sched = make_schedule(n, xi, measure.k)
    base = np.round(n * measure.weights).astype(np.int64)
    base[0] += n - base.sum()
    adj = base.copy()
    adj[0] += 1
    adj[-1] -= 1
    reps = []
    for j, counts in enumerate((base, adj)):
        if counts.min() < 0 or not is_strongly_typical(
            np.repeat(np.arange(measure.k), counts), measure.weights, sched.eta
        ):
            raise ValueError("constructed type is not strongly typical; increase n")
        y = np.repeat(np.arange(measure.k), counts)
        reps.append(
            stratum_report(measure, y, delta, sched, trials, stream.child(j), threads)
        )
    return AdjacentTypeDiscrepancy(
        base_counts=tuple(int(c) for c in base),
        adjacent_counts=tuple(int(c) for c in adj),
        base_log_prob=reps[0].log_probability,
        adjacent_log_prob=reps[1].log_probability,
    )
