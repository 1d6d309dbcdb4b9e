"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Statistical gates run on fixed seeds, so the whole suite is deterministic.
Stated runtime budgets are asserted alongside the numeric tolerances.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import scipy.stats as st

from strata_lab import (
    RandomStream,
    component_entropy,
    dimension_interval,
    entropy_monte_carlo,
    estimate_stratum_volume,
    estimate_tv_defect,
    estimate_typical_probability,
    estimate_typical_volume,
    exhaustive_oracle,
    info_dimension,
    mixture_entropy,
    renyi_defect,
    sample,
    sample_strongly_typical_labels,
    schedule,
    stratum_dimension,
    type_symmetry_property,
)
from strata_lab.dyadic import aggregate_to_parent, cell_table
from strata_lab.measure import sample_labels
from strata_lab.typicality import BOUNDARY_TOL

from conftest import H_M3, LN2, LN_SQRT2, SEED

_results = []


@contextmanager
def criterion(number, name, budget_s=None):
    t0 = time.perf_counter()
    outcome = {"ok": False, "detail": ""}
    try:
        yield outcome
        outcome["ok"] = True
    finally:
        elapsed = time.perf_counter() - t0
        status = "PASS" if outcome["ok"] else "FAIL"
        line = f"ACCEPTANCE {number:02d} {name}: {status} ({elapsed:.2f}s)"
        if outcome["detail"]:
            line += f"  [{outcome['detail']}]"
        print(line, flush=True)
        _results.append(line)
        if budget_s is not None and outcome["ok"]:
            assert elapsed < budget_s, f"criterion {number} exceeded {budget_s}s budget"


def binom_se(p, trials):
    return math.sqrt(p * (1.0 - p) / trials)


def test_criterion_1_chain_rule_exactness(m1, m3):
    with criterion(1, "chain-rule-exactness", budget_s=1.0) as out:
        e1 = mixture_entropy(m1)
        assert abs(e1.total - LN2) <= 1e-12
        assert abs(e1.label - LN2) <= 1e-12 and abs(e1.conditional) <= 1e-12
        e3 = mixture_entropy(m3)
        assert abs(e3.total - H_M3) <= 1e-12
        est1, se1 = entropy_monte_carlo(m1, RandomStream(SEED, (1,)), 10**5)
        assert abs(est1 - e1.total) <= max(3 * se1, 1e-9)
        est3, se3 = entropy_monte_carlo(m3, RandomStream(SEED, (3,)), 10**5)
        assert abs(est3 - e3.total) <= 3 * se3
        out["detail"] = f"H(M1)={e1.total:.12f} H(M3)={e3.total:.12f} mc={est3:.6f}±{se3:.6f}"


def test_criterion_2_aep_probability(m3):
    with criterion(2, "aep-typical-probability", budget_s=5.0) as out:
        n2 = np.arange(101)
        ok = np.abs(n2 / 100 - 0.5) * LN_SQRT2 <= 0.1 + BOUNDARY_TOL
        oracle = float(st.binom.pmf(n2[ok], 100, 0.5).sum())
        est = estimate_typical_probability(m3, 100, 0.1, 10**4, RandomStream(SEED, (10,)))
        assert abs(est.value - oracle) <= 3 * max(binom_se(oracle, 10**4), 1e-9)
        est1000 = estimate_typical_probability(
            m3, 1000, 0.1, 10**4, RandomStream(SEED, (11,))
        )
        assert est1000.value >= 0.95
        out["detail"] = f"n=100: {est.value:.6f} vs oracle {oracle:.6f}; n=1000: {est1000.value:.4f}"


def test_criterion_3_aep_volume_bounds(m1, atoms3):
    with criterion(3, "aep-volume-bounds", budget_s=10.0) as out:
        h = mixture_entropy(m1).total
        delta = 0.01
        prob = estimate_typical_probability(m1, 10, delta, 1000, RandomStream(SEED, (20,)))
        vol = estimate_typical_volume(m1, 10, delta, 2000, RandomStream(SEED, (21,)))
        assert abs(vol.value - 10 * LN2) <= max(3 * vol.standard_error, 1e-9)
        low = math.log(prob.value) + 10 * (h - delta)
        high = 10 * (h + delta)
        assert low - 1e-12 <= vol.value <= high + 1e-12
        oracle = exhaustive_oracle(atoms3, 3, 0.2)
        est = estimate_typical_volume(atoms3, 3, 0.2, 10**4, RandomStream(SEED, (22,)))
        assert abs(est.value - math.log(oracle.volume)) <= 3 * est.standard_error
        out["detail"] = (
            f"M1: {vol.value:.6f} in [{low:.4f},{high:.4f}]; "
            f"atoms: exp({est.value:.4f})≈{math.exp(est.value):.2f} vs {oracle.volume:.0f}"
        )


def test_criterion_4_stratum_volume_bound(m3):
    with criterion(4, "stratum-volume-upper-bound", budget_s=30.0) as out:
        n, delta = 50, 0.1
        sched = schedule(n, 0.1, m3.k)
        bound = mixture_entropy(m3).conditional + delta + sched.delta_prime
        ys = sample_strongly_typical_labels(m3, n, sched, 50, RandomStream(SEED, (30,)))
        worst = -math.inf
        for i, y in enumerate(ys):
            est = estimate_stratum_volume(
                m3, y, delta, sched, 400, RandomStream(SEED, (31, i))
            )
            rate = est.value / n
            worst = max(worst, rate - 3 * est.standard_error / n)
            assert rate <= bound + 3 * est.standard_error / n
        out["detail"] = f"50/50 strata; max rate {worst:.4f} <= bound {bound:.4f}"


def test_criterion_5_strong_typicality_coverage(m3):
    with criterion(5, "strong-typicality-coverage") as out:
        details = []
        for n, key in ((100, 50), (1000, 51)):
            sched = schedule(n, 0.1, m3.k)
            rng = RandomStream(SEED, (key,)).generator()
            labels = sample_labels(m3, rng, 10**4 * n).reshape(10**4, n)
            counts = (labels == 1).sum(axis=1)
            # both coordinates deviate together for k=2
            fails = ~(np.abs(counts - n * 0.5) < n * sched.eta)
            rate = float(fails.mean())
            assert rate <= sched.epsilon
            details.append(f"n={n}: {rate:.2e} <= eps={sched.epsilon:.2e}")
        out["detail"] = "; ".join(details)


def test_criterion_6_dimension_concentration(m3):
    with criterion(6, "dimension-concentration") as out:
        n = 50
        sched = schedule(n, 0.1, m3.k)
        ys = sample_strongly_typical_labels(m3, n, sched, 1000, RandomStream(SEED, (60,)))
        lo_d, hi_d = dimension_interval(n, 0.1, m3.weights, m3.dims, "derived")
        lo_l, hi_l = dimension_interval(n, 0.1, m3.weights, m3.dims, "literal")
        dims = np.array([stratum_dimension(y, m3.dims) for y in ys])
        derived_rate = float(np.mean((dims >= lo_d) & (dims <= hi_d)))
        literal_rate = float(np.mean((dims >= lo_l) & (dims <= hi_l)))
        assert derived_rate == 1.0
        out["detail"] = (
            f"derived [{lo_d:.2f},{hi_d:.2f}]: 100%; "
            f"literal rate (diagnostic): {literal_rate:.3f}"
        )


def test_criterion_7_tv_defect(m3):
    with criterion(7, "tv-defect-decrease") as out:
        trials = 10**4
        results = {}
        for n, key in ((200, 70), (2000, 71)):
            sched = schedule(n, 0.1, m3.k)
            n2 = np.arange(n + 1)
            weak = np.abs(n2 / n - 0.5) * LN_SQRT2 <= 0.1 + BOUNDARY_TOL
            strong = np.abs(n2 - n * 0.5) < n * sched.eta
            oracle = 1.0 - float(st.binom.pmf(n2[weak & strong], n, 0.5).sum())
            est = estimate_tv_defect(m3, n, 0.1, 0.1, trials, RandomStream(SEED, (key,)))
            assert abs(est.value - oracle) <= 3 * max(binom_se(oracle, trials), 1e-9)
            results[n] = (est.value, oracle)
        assert results[2000][0] <= results[200][0]
        assert results[2000][1] < results[200][1]
        assert results[2000][0] <= 0.1
        out["detail"] = (
            f"defect(200)={results[200][0]:.2e} (oracle {results[200][1]:.2e}), "
            f"defect(2000)={results[2000][0]:.2e} (oracle {results[2000][1]:.2e})"
        )


def test_criterion_8_information_dimension(m3, unit_square):
    with criterion(8, "information-dimension", budget_s=5.0) as out:
        slope2, _, r2 = info_dimension(unit_square, range(1, 9))
        assert abs(slope2 - 2.0) <= 1e-9
        slope3, _, r3 = info_dimension(m3, range(3, 11))
        assert abs(slope3 - 0.5) <= 0.05
        out["detail"] = f"square slope {slope2:.12f} (R2={r2}); M3 slope {slope3:.6f}"


def test_criterion_9_renyi_defect(diag_measure, offgrid_measure, offgrid_segment):
    with criterion(9, "renyi-defect-convergence") as out:
        for level in range(0, 11):
            assert abs(renyi_defect(diag_measure, level) - LN_SQRT2) <= 1e-9
        h = component_entropy(offgrid_segment)
        gaps = [abs(renyi_defect(offgrid_measure, l) - h) for l in range(2, 11)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        out["detail"] = f"diag=ln√2 at levels 0..10; off-grid gap {gaps[0]:.1e}→{gaps[-1]:.1e}"


def test_criterion_10_type_symmetry(m3):
    with criterion(10, "type-symmetry") as out:
        rng = RandomStream(SEED, (90,)).generator()
        hits = 0
        for trial in range(1000):
            seq = sample(m3, RandomStream(SEED, (91, trial)), 25)
            perm = rng.permutation(25)
            hits += type_symmetry_property(m3, seq, perm)
        assert hits == 1000
        out["detail"] = "1000/1000 exact"


def test_criterion_11_martingale_refinement(m1, m3, atoms3, offgrid_measure, unit_square):
    with criterion(11, "martingale-refinement") as out:
        fixtures = {
            "m1": m1,
            "m3": m3,
            "atoms3": atoms3,
            "offgrid": offgrid_measure,
            "square": unit_square,
        }
        checked = 0
        for name, m in fixtures.items():
            for level in range(0, 8):
                parent = cell_table(m, level).as_dict()
                child = aggregate_to_parent(cell_table(m, level + 1))
                assert set(parent) == set(child), (name, level)
                for key, (p, mu) in parent.items():
                    pc, muc = child[key]
                    assert abs(p - pc) <= 1e-12 and abs(mu - muc) <= 1e-12
                    checked += 1
        out["detail"] = f"{checked} parent cells exact across 5 fixtures, levels 0..7"


def test_zzz_summary():
    print()
    print("=" * 72)
    for line in _results:
        print(line)
    print("=" * 72)
    assert all(" PASS " in line or ": PASS" in line for line in _results)
