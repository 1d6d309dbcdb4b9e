"""Config-driven experiment runner.

Subcommands: ``entropy``, ``aep``, ``stratum``, ``dims``, ``renyi``,
``diagnose`` run the experiments; ``validate`` checks a config without
running.  Exit codes: 0 success, 2 configuration/validation error, 3
estimator degeneracy.  Flags override values from the config file's optional
``[experiment]`` table; the seed is mandatory for every run.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import aep, dyadic
from .config import MeasureConfig, load_measure_config
from .errors import ConfigError, DegenerateWeights, StrataError
from .geometry import check_disjoint
from .measure import (
    entropy_monte_carlo,
    mixture_entropy,
    score_moments,
)
from .randomstream import RandomStream
from .report import ReportWriter, write_line_svg
from .typicality import dimension_interval, schedule, stratum_dimension
from .errors import OverlappingCarriers

EXPERIMENTS = ("entropy", "aep", "stratum", "dims", "renyi", "diagnose")

DEFAULTS = {
    "n": 100,
    "delta": 0.1,
    "xi": 0.1,
    "trials": 10000,
    "levels": "3:10",
    "threads": 1,
}


@dataclass
class ExperimentConfig:
    kind: str
    measure_cfg: MeasureConfig
    n: int
    delta: float
    xi: float
    trials: int
    levels: tuple[int, ...]
    seed: int
    threads: int
    out: Path
    formats: tuple[str, ...]

    @property
    def measure_name(self) -> str:
        return self.measure_cfg.path.stem if self.measure_cfg.path else "<inline>"

    def params(self) -> dict:
        return {
            "n": self.n,
            "delta": self.delta,
            "xi": self.xi,
            "trials": self.trials,
            "levels": ":".join(str(l) for l in (self.levels[0], self.levels[-1])),
            "threads": self.threads,
            "seed": self.seed,
        }


def _parse_levels(text: str) -> tuple[int, ...]:
    try:
        lo, hi = text.split(":")
        levels = tuple(range(int(lo), int(hi) + 1))
    except ValueError as exc:
        raise ConfigError(f"--levels expects LO:HI, got {text!r}") from exc
    if len(levels) < 1:
        raise ConfigError("empty level range")
    return levels


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strata-lab",
        description="Experiments on stratified measures: entropy, typicality, dimension.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("validate",):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="measure TOML file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--xi", type=float, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--levels", type=str, default=None, help="LO:HI")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", type=str, default="reports")
        p.add_argument(
            "--format",
            type=str,
            default="csv",
            help="comma list from {csv,svg}; svg adds plots where defined",
        )
    return parser


def _resolve(args) -> ExperimentConfig:
    cfg = load_measure_config(args.config)
    file_defaults = cfg.experiment_defaults

    def pick(name, cast):
        flag = getattr(args, name, None)
        if flag is not None:
            return cast(flag)
        if name in file_defaults:
            return cast(file_defaults[name])
        return cast(DEFAULTS[name]) if name in DEFAULTS else None

    seed = args.seed if args.seed is not None else file_defaults.get("seed")
    if seed is None:
        raise ConfigError("a seed is mandatory: pass --seed or set experiment.seed")
    formats = tuple(s.strip() for s in args.format.split(",") if s.strip())
    for f in formats:
        if f not in ("csv", "svg"):
            raise ConfigError(f"unknown format {f!r}")
    return ExperimentConfig(
        kind=args.command,
        measure_cfg=cfg,
        n=pick("n", int),
        delta=pick("delta", float),
        xi=pick("xi", float),
        trials=pick("trials", int),
        levels=_parse_levels(pick("levels", str)),
        seed=int(seed),
        threads=pick("threads", int),
        out=Path(args.out),
        formats=formats,
    )


def validate(cfg: MeasureConfig, params: dict | None = None) -> list[str]:
    """All violations in a config (weights, overlaps, ranges), without running."""
    diags: list[str] = []
    blocks = cfg.raw.get("component", [])
    if not blocks:
        diags.append("ConfigError: no [[component]] blocks")
        return diags
    weights = []
    specs = []
    for i, tbl in enumerate(blocks):
        w = tbl.get("weight")
        if w is None:
            diags.append(f"ConfigError: component {i} has no weight")
            continue
        weights.append(float(w))
        if float(w) <= 0:
            diags.append(f"ZeroWeight: component {i} has weight {w}")
        try:
            from .config import component_from_table

            specs.append(component_from_table(tbl))
        except ConfigError as exc:
            diags.append(f"ConfigError: component {i}: {exc}")
    if weights and abs(math.fsum(weights) - 1.0) > 1e-12:
        diags.append(f"WeightSumMismatch: weights sum to {math.fsum(weights)!r}")
    ambient = {c.ambient_dim for c in specs}
    if len(ambient) > 1:
        diags.append(f"AmbientMismatch: ambient dimensions {sorted(ambient)}")
    elif specs:
        try:
            check_disjoint(specs)
        except OverlappingCarriers as exc:
            diags.append(f"OverlappingCarriers: {exc}")
    if cfg.ambient_dim and len(ambient) == 1 and ambient != {cfg.ambient_dim}:
        diags.append(
            f"AmbientMismatch: ambient_dim={cfg.ambient_dim} but components in "
            f"R^{ambient.pop()}"
        )
    if params:
        if params.get("delta", 0.1) < 0:
            diags.append("ConfigError: delta must be >= 0")
        if not 0 < params.get("xi", 0.1) < 0.5:
            diags.append("BadExponent: xi must lie in (0, 1/2)")
        if params.get("n", 1) < 1:
            diags.append("ConfigError: n must be >= 1")
        if params.get("trials", 100) < 100:
            diags.append("ConfigError: trials must be >= 100")
    return diags


# ---------------------------------------------------------------------------
# experiment bodies
# ---------------------------------------------------------------------------

def _run_entropy(cfg: ExperimentConfig, rep: ReportWriter) -> None:
    measure = cfg.measure_cfg.build()
    ent = mixture_entropy(measure)
    rep.add("h_label", ent.label)
    rep.add("h_conditional", ent.conditional)
    rep.add("h_total", ent.total)
    est, se = entropy_monte_carlo(measure, RandomStream(cfg.seed), max(cfg.n, 2))
    ok = abs(est - ent.total) <= max(3 * se, 1e-9)
    rep.add("mc_entropy", est, se, ent.total - 3 * se, ent.total + 3 * se, ok)


def _run_aep(cfg: ExperimentConfig, rep: ReportWriter) -> None:
    measure = cfg.measure_cfg.build()
    ent = mixture_entropy(measure)
    sched = schedule(cfg.n, cfg.xi, measure.k)
    _, score_var = score_moments(measure)
    stream = RandomStream(cfg.seed)
    prob = aep.estimate_typical_probability(
        measure, cfg.n, cfg.delta, cfg.trials, stream.child(0), cfg.threads
    )
    # finite-n lower bound: Chebyshev on the weak score
    cheb = 1.0 - score_var / (cfg.n * cfg.delta**2) if cfg.delta > 0 else -math.inf
    rep.add(
        "typical_probability",
        prob.value,
        prob.standard_error,
        cheb,
        1.0,
        prob.value >= cheb - 3 * prob.standard_error,
    )
    vol = aep.estimate_typical_volume(
        measure, cfg.n, cfg.delta, max(cfg.trials, 1000), stream.child(1), cfg.threads
    )
    low = (
        math.log(prob.value) + cfg.n * (ent.total - cfg.delta)
        if prob.value > 0
        else -math.inf
    )
    high = cfg.n * (ent.total + cfg.delta)
    se_comb = vol.standard_error + (
        prob.standard_error / prob.value if prob.value > 0 else 0.0
    )
    ok = (vol.value >= low - 3 * se_comb) and (vol.value <= high + 3 * vol.standard_error)
    rep.add("log_typical_volume", vol.value, vol.standard_error, low, high, ok)
    defect = aep.estimate_tv_defect(
        measure, cfg.n, cfg.delta, cfg.xi, cfg.trials, stream.child(2), cfg.threads
    )
    # union bound: Hoeffding budget for labels plus Chebyshev for the score
    dbound = sched.epsilon + (
        score_var / (cfg.n * cfg.delta**2) if cfg.delta > 0 else math.inf
    )
    rep.add(
        "tv_defect",
        defect.value,
        defect.standard_error,
        0.0,
        dbound,
        defect.value <= dbound + 3 * defect.standard_error,
    )
    if "svg" in cfg.formats:
        ladder = sorted({max(2, cfg.n * k // 5) for k in range(1, 6)})
        vols = [
            aep.estimate_typical_volume(
                measure, m, cfg.delta, min(cfg.trials, 2000), stream.child(100 + i), cfg.threads
            ).value
            for i, m in enumerate(ladder)
        ]
        write_line_svg(
            cfg.out / "aep_volume_vs_n.svg",
            ladder,
            vols,
            "ln typical volume vs n",
            "n",
            "ln volume",
        )


def _type_tag(counts) -> str:
    return "-".join(str(int(c)) for c in counts)


def _run_stratum(cfg: ExperimentConfig, rep: ReportWriter) -> None:
    measure = cfg.measure_cfg.build()
    ent = mixture_entropy(measure)
    sched = schedule(cfg.n, cfg.xi, measure.k)
    stream = RandomStream(cfg.seed)
    n_strata = 50
    ys = aep.sample_strongly_typical_labels(measure, cfg.n, sched, n_strata, stream.child(0))
    bound = cfg.n * (ent.conditional + cfg.delta + sched.delta_prime)
    passes = 0
    for i, y in enumerate(ys):
        r = aep.stratum_report(
            measure, y, cfg.delta, sched, cfg.trials, stream.child(i + 1), cfg.threads
        )
        ok = r.log_volume.value <= bound + 3 * r.log_volume.standard_error
        passes += ok
        rep.add(
            f"stratum_log_volume/type={_type_tag(r.ptype.counts)}",
            r.log_volume.value,
            r.log_volume.standard_error,
            None,
            bound,
            ok,
        )
    rep.add("stratum_bound_pass_rate", passes / len(ys), None, None, None, passes == len(ys))


def _run_dims(cfg: ExperimentConfig, rep: ReportWriter) -> None:
    measure = cfg.measure_cfg.build()
    sched = schedule(cfg.n, cfg.xi, measure.k)
    stream = RandomStream(cfg.seed)
    count = min(cfg.trials, 1000)
    ys = aep.sample_strongly_typical_labels(measure, cfg.n, sched, count, stream.child(0))
    lo_d, hi_d = dimension_interval(cfg.n, cfg.xi, measure.weights, measure.dims, "derived")
    lo_l, hi_l = dimension_interval(
        cfg.n, cfg.xi, measure.weights, measure.dims, "literal"
    )
    in_d = in_l = 0
    for y in ys:
        m = stratum_dimension(y, measure.dims)
        in_d += lo_d <= m <= hi_d
        in_l += lo_l <= m <= hi_l
    rep.add("dimension_coverage_derived", in_d / count, None, lo_d, hi_d, in_d == count)
    rep.add("dimension_coverage_literal", in_l / count, None, lo_l, hi_l, None)


def _run_renyi(cfg: ExperimentConfig, rep: ReportWriter) -> None:
    measure = cfg.measure_cfg.build()
    levels = cfg.levels
    entropies = []
    for level in levels:
        h = dyadic.quantized_entropy(measure, level)
        entropies.append(h)
        rep.add(f"quantized_entropy/level={level}", h)
        rep.add(f"renyi_defect/level={level}", dyadic.renyi_defect(measure, level))
    slope, intercept, r2 = dyadic.info_dimension(measure, levels)
    mean_dim = float(np.sum(measure.weights * measure.dims))
    rep.add(
        "info_dimension_slope",
        slope,
        None,
        mean_dim - 0.05,
        mean_dim + 0.05,
        abs(slope - mean_dim) <= 0.05,
    )
    rep.add("info_dimension_r_squared", r2, None, 0.999, 1.0, r2 >= 0.999)
    if r2 < 0.999:
        print(f"warning: info-dimension fit has R^2 = {r2!r} < 0.999", file=sys.stderr)
    rep.add("info_dimension_intercept", intercept)
    if "svg" in cfg.formats:
        write_line_svg(
            cfg.out / f"{cfg.kind}_entropy_vs_level.svg",
            list(levels),
            entropies,
            "quantized entropy vs dyadic level",
            "level",
            "H (nats)",
        )


def _run_diagnose(cfg: ExperimentConfig, rep: ReportWriter) -> None:
    measure = cfg.measure_cfg.build()
    stream = RandomStream(cfg.seed)
    epsilon = 0.3  # fixed diagnostic default, documented in the README
    report = aep.tightness_diagnostic(
        measure,
        cfg.n,
        cfg.delta,
        cfg.xi,
        epsilon,
        sampled_types=max(10, min(50, cfg.trials)),
        stream=stream.child(0),
        trials=max(cfg.trials, 200),
        threads=cfg.threads,
    )
    rep.add("tightness_threshold", report.threshold)
    rep.add("tightness_fraction_exceeding", report.fraction_exceeding)
    rep.add("tightness_log_count_rate", report.log_count_rate)
    rep.add("ln_strongly_typical_count", report.ln_typical_count)
    if measure.k >= 2:
        disc = aep.adjacent_type_discrepancy(
            measure, cfg.n, cfg.delta, cfg.xi, max(cfg.trials, 200), stream.child(1), cfg.threads
        )
        rep.add(
            f"adjacent_type_log_prob/type={_type_tag(disc.base_counts)}",
            disc.base_log_prob.value,
            disc.base_log_prob.standard_error,
        )
        rep.add(
            f"adjacent_type_log_prob/type={_type_tag(disc.adjacent_counts)}",
            disc.adjacent_log_prob.value,
            disc.adjacent_log_prob.standard_error,
        )
    defect = aep.estimate_tv_defect(
        measure, cfg.n, cfg.delta, cfg.xi, cfg.trials, stream.child(2), cfg.threads
    )
    rep.add("tv_defect", defect.value, defect.standard_error)


_RUNNERS = {
    "entropy": _run_entropy,
    "aep": _run_aep,
    "stratum": _run_stratum,
    "dims": _run_dims,
    "renyi": _run_renyi,
    "diagnose": _run_diagnose,
}


def run(cfg: ExperimentConfig) -> int:
    diags = validate(cfg.measure_cfg, cfg.params())
    if diags:
        for d in diags:
            print(d, file=sys.stderr)
        return 2
    rep = ReportWriter(experiment=cfg.kind, measure=cfg.measure_name, params=cfg.params())
    try:
        _RUNNERS[cfg.kind](cfg, rep)
    except DegenerateWeights as exc:
        print(f"DegenerateWeights: {exc}", file=sys.stderr)
        return 3
    except StrataError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    out = rep.write(cfg.out / f"{cfg.kind}.csv")
    print(out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            cfg = load_measure_config(args.config)
            diags = validate(cfg)
            for d in diags:
                print(d)
            return 2 if diags else 0
        return run(_resolve(args))
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
