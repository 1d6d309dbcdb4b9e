"""Exact dyadic-cell tables, quantized entropy and information dimension.

The quantizer is the dyadic grid: at level l the ambient space is split into
half-open cubes of side 2^-l.  For catalog measures every cell probability
p = rho(C) and every intersection measure mu(C ∩ E) is available in closed
form, which removes quadrature error from the information-dimension and
defect-term experiments.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import TooLarge
from .measure import StratifiedMeasure, sample
from .randomstream import RandomStream

MAX_TABLE_ENTRIES = 10**7


@dataclass(frozen=True)
class DyadicCell:
    level: int
    index: tuple[int, ...]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        h = 2.0**-self.level
        j = np.asarray(self.index, dtype=float)
        return j * h, (j + 1.0) * h


def cell_index(point, level: int) -> DyadicCell:
    """Half-open dyadic cell containing the point: floor(2^l x) per coordinate."""
    x = np.asarray(point, dtype=float).reshape(-1)
    scale = 2.0**level
    return DyadicCell(level=level, index=tuple(int(math.floor(v * scale)) for v in x))


def cell_measure(component, cell: DyadicCell) -> float:
    """Exact H^m(C ∩ E) for a catalog component."""
    from .geometry import require_catalog

    require_catalog(component)
    _, meas = component.cell_intersection(cell.level, cell.index)
    return meas


@dataclass(frozen=True)
class CellTable:
    """All positive-probability cells of a measure at one level.

    ``component_probs[r, i]`` holds q_i * rho_i(C_r) and
    ``component_measures[r, i]`` holds H^{m_i}(C_r ∩ E_i); ``probs`` and
    ``measures`` are their row sums. Rows are sorted lexicographically.
    """

    level: int
    indices: np.ndarray  # (M, d) int64
    component_probs: np.ndarray  # (M, k)
    component_measures: np.ndarray  # (M, k)

    @property
    def probs(self) -> np.ndarray:
        return self.component_probs.sum(axis=1)

    @property
    def measures(self) -> np.ndarray:
        return self.component_measures.sum(axis=1)

    def __len__(self) -> int:
        return self.indices.shape[0]

    def as_dict(self) -> dict[tuple[int, ...], tuple[float, float]]:
        p = self.probs
        m = self.measures
        return {
            tuple(int(v) for v in row): (float(p[r]), float(m[r]))
            for r, row in enumerate(self.indices)
        }


def cell_table(measure: StratifiedMeasure, level: int) -> CellTable:
    """Exact table of cell probabilities q_i * (component mass in cell)."""
    bound = sum(c.cells_upper_bound(level) for c in measure.components)
    if bound > MAX_TABLE_ENTRIES:
        raise TooLarge(
            f"cell table could reach {bound} entries (> {MAX_TABLE_ENTRIES})"
        )
    per_comp: list[dict] = []
    keys: set[tuple[int, ...]] = set()
    for comp in measure.components:
        cells = comp.cells(level)
        per_comp.append(cells)
        keys.update(cells.keys())
        if len(keys) > MAX_TABLE_ENTRIES:
            raise TooLarge(f"cell table exceeds {MAX_TABLE_ENTRIES} entries")
    ordered = sorted(keys)
    d = measure.ambient_dim
    k = measure.k
    indices = np.asarray(ordered, dtype=np.int64).reshape(len(ordered), d)
    cprobs = np.zeros((len(ordered), k))
    cmeas = np.zeros((len(ordered), k))
    for i, (q, cells) in enumerate(zip(measure.weights, per_comp)):
        for r, key in enumerate(ordered):
            if key in cells:
                mass, meas = cells[key]
                cprobs[r, i] = q * mass
                cmeas[r, i] = meas
    positive = cprobs.sum(axis=1) > 0.0
    return CellTable(
        level=level,
        indices=indices[positive],
        component_probs=cprobs[positive],
        component_measures=cmeas[positive],
    )


def aggregate_to_parent(table: CellTable) -> dict[tuple[int, ...], tuple[float, float]]:
    """Sum level-(l+1) entries over their level-l parent cells."""
    out: dict[tuple[int, ...], tuple[float, float]] = {}
    probs = table.probs
    meas = table.measures
    for r, row in enumerate(table.indices):
        parent = tuple(int(v) >> 1 for v in row)
        p0, m0 = out.get(parent, (0.0, 0.0))
        out[parent] = (p0 + float(probs[r]), m0 + float(meas[r]))
    return out


def quantized_entropy(
    measure: StratifiedMeasure,
    level: int,
    mode: str = "exact",
    samples: int | None = None,
    stream: RandomStream | None = None,
    miller_madow: bool = False,
) -> float:
    """H_#(X quantized at side 2^-level), in nats.

    ``exact`` computes -sum p ln p from the cell table; ``plug-in`` estimates
    it from empirical cell frequencies, optionally adding the Miller-Madow
    correction (K-1)/(2N) for K occupied cells.
    """
    if mode == "exact":
        p = cell_table(measure, level).probs
        return float(-np.sum(p * np.log(p)))
    if mode != "plug-in":
        raise ValueError(f"unknown mode {mode!r}")
    if samples is None or samples < 10**3 or stream is None:
        raise ValueError("plug-in mode needs a stream and samples >= 1000")
    seq = sample(measure, stream, samples)
    scaled = np.floor(seq.points * 2.0**level).astype(np.int64)
    _, counts = np.unique(scaled, axis=0, return_counts=True)
    freq = counts / samples
    h = float(-np.sum(freq * np.log(freq)))
    if miller_madow:
        h += (len(counts) - 1) / (2.0 * samples)
    return h


def plugin_entropy_se(measure: StratifiedMeasure, level: int, samples: int) -> float:
    """Asymptotic standard error of the plug-in estimator: sqrt(Var[-ln p]/N)."""
    p = cell_table(measure, level).probs
    logs = np.log(p)
    var = float(np.sum(p * logs**2) - np.sum(p * logs) ** 2)
    return math.sqrt(max(var, 0.0) / samples)


def info_dimension(measure: StratifiedMeasure, levels: Iterable[int]):
    """OLS slope of H_#(X_{2^l}) against l ln 2 over the given levels.

    Returns (slope, intercept, r_squared); the slope estimates the
    information dimension, which for standard-form measures is sum q_i m_i.
    """
    lv = sorted(int(l) for l in levels)
    if len(lv) < 3:
        raise ValueError("need at least 3 levels")
    x = np.asarray(lv, dtype=float) * math.log(2.0)
    y = np.asarray([quantized_entropy(measure, l) for l in lv])
    xm = x - x.mean()
    ym = y - y.mean()
    sxx = float(np.sum(xm * xm))
    slope = float(np.sum(xm * ym) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum(ym**2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def renyi_defect(measure: StratifiedMeasure, level: int) -> float:
    """H_#(X_{2^l}) + sum_{p>0} p ln mu(C ∩ E).

    For a 1-stratified catalog measure this converges to the generalized
    entropy H_mu(rho) as the level grows; the second term is the
    geometry-dependent defect.
    """
    table = cell_table(measure, level)
    p = table.probs
    return float(-np.sum(p * np.log(p)) + np.sum(p * np.log(table.measures)))


def defect_term_sequence(measure: StratifiedMeasure, levels: Sequence[int]) -> list[float]:
    """sum_{p>0} p ln K(j, 2^l) with mu(C∩E) = K 2^{-l m}; reported per level.

    No limit formula is claimed; this is the empirical sequence only.
    """
    out = []
    for level in levels:
        table = cell_table(measure, level)
        p = table.probs
        m = measure.dims[np.argmax(table.component_measures > 0, axis=1)]
        k_factor = table.measures * (2.0 ** (level * m.astype(float)))
        out.append(float(np.sum(p * np.log(k_factor))))
    return out


def dyadic_density_estimate(measure: StratifiedMeasure, point, level: int) -> float:
    """rho(C)/mu(C) for the level-l cell containing the point (0 when mu(C)=0).

    Converges to the mixture density d rho/d mu at almost every point as the
    level grows (martingale convergence on the refining dyadic filtration).
    """
    cell = cell_index(point, level)
    rho_c = 0.0
    mu_c = 0.0
    for q, comp in zip(measure.weights, measure.components):
        mass, meas = comp.cell_intersection(cell.level, cell.index)
        rho_c += q * mass
        mu_c += meas
    if mu_c == 0.0:
        return 0.0
    return rho_c / mu_c


def log_sum_inequality_gap(a, b) -> float:
    """sum_i a_i ln(a_i/b_i) - a ln(a/b); nonnegative by the log-sum inequality."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("log-sum inequality needs nonnegative entries")
    if np.any((b == 0) & (a > 0)):
        return math.inf
    mask = a > 0
    lhs = float(np.sum(a[mask] * np.log(a[mask] / b[mask])))
    ta, tb = float(a.sum()), float(b.sum())
    rhs = 0.0 if ta == 0.0 else ta * math.log(ta / tb)
    return lhs - rhs


def export_cell_table_csv(table: CellTable, path) -> None:
    """One row per (cell, contributing component): level, index, p, mu, id."""
    d = table.indices.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["level", *[f"index_{c}" for c in range(d)], "p", "mu_cell", "component_id"]
        )
        for r in range(len(table)):
            for i in range(table.component_probs.shape[1]):
                p = table.component_probs[r, i]
                if p > 0.0:
                    writer.writerow(
                        [
                            table.level,
                            *[int(v) for v in table.indices[r]],
                            repr(float(p)),
                            repr(float(table.component_measures[r, i])),
                            i,
                        ]
                    )
