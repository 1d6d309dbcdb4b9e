"""Report emission: deterministic CSV rows and static SVG line plots.

Every CSV row echoes the full parameter set, the seed and a build id derived
from the package sources, so a row can be replayed exactly.  Formatting uses
shortest-roundtrip floats and fixed newlines: identical runs produce byte
identical files.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

CSV_COLUMNS = [
    "experiment",
    "measure",
    "n",
    "delta",
    "xi",
    "trials",
    "levels",
    "threads",
    "seed",
    "build_id",
    "quantity",
    "estimate",
    "se",
    "bound_low",
    "bound_high",
    "pass",
]

_build_id_cache: str | None = None


def build_id() -> str:
    """Short content hash of the installed package sources."""
    global _build_id_cache
    if _build_id_cache is None:
        root = Path(__file__).parent
        digest = hashlib.sha256()
        for p in sorted(root.rglob("*.py")) + sorted(root.rglob("*.pyx")):
            digest.update(p.relative_to(root).as_posix().encode())
            digest.update(p.read_bytes())
        _build_id_cache = digest.hexdigest()[:12]
    return _build_id_cache


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return repr(v)
    return str(v)


@dataclass
class ReportWriter:
    """Collects rows for one experiment run and writes a single CSV."""

    experiment: str
    measure: str
    params: dict
    rows: list[list[str]] = field(default_factory=list)

    def add(self, quantity, estimate, se=None, bound_low=None, bound_high=None, ok=None):
        self.rows.append(
            [
                self.experiment,
                self.measure,
                _cell(self.params.get("n")),
                _cell(self.params.get("delta")),
                _cell(self.params.get("xi")),
                _cell(self.params.get("trials")),
                _cell(self.params.get("levels")),
                _cell(self.params.get("threads")),
                _cell(self.params.get("seed")),
                build_id(),
                quantity,
                _cell(estimate),
                _cell(se),
                _cell(bound_low),
                _cell(bound_high),
                _cell(ok),
            ]
        )

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            writer.writerows(self.rows)
        return path


def write_line_svg(path, xs, ys, title: str, xlabel: str, ylabel: str) -> Path:
    """Minimal deterministic SVG polyline plot (no external dependencies)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    width, height, margin = 640, 420, 56
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    ticks = []
    for frac in (0.0, 0.5, 1.0):
        tx = x0 + frac * (x1 - x0)
        ty = y0 + frac * (y1 - y0)
        ticks.append(
            f'<text x="{sx(tx):.2f}" y="{height - margin + 18}" font-size="11" '
            f'text-anchor="middle">{tx:.4g}</text>'
        )
        ticks.append(
            f'<text x="{margin - 8}" y="{sy(ty):.2f}" font-size="11" '
            f'text-anchor="end">{ty:.4g}</text>'
        )
    body = f"""<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">
<rect width="{width}" height="{height}" fill="white"/>
<text x="{width / 2:.0f}" y="24" font-size="14" text-anchor="middle">{title}</text>
<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>
<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>
<text x="{width / 2:.0f}" y="{height - 12}" font-size="12" text-anchor="middle">{xlabel}</text>
<text x="16" y="{height / 2:.0f}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {height / 2:.0f})">{ylabel}</text>
{chr(10).join(ticks)}
<polyline fill="none" stroke="#1f6fb2" stroke-width="1.5" points="{pts}"/>
</svg>
"""
    path.write_text(body)
    return path
