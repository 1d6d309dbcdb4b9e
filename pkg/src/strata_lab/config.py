"""Declarative measure configs (TOML) with canonical write-back.

A measure file holds ``ambient_dim``, optional ``[experiment]`` defaults, and
one ``[[component]]`` block per component (kind, weight, geometry fields,
density pieces).  Loading keeps the parsed document, and dumping re-emits it
in a fixed canonical format (shortest-roundtrip floats, preserved key order),
so write-back equals the input byte for byte whenever the input is canonical.

Example
-------
    ambient_dim = 2

    [[component]]
    kind = "atoms"
    weight = 0.5
    points = [[0.25, 0.75]]
    pmf = [1.0]

    [[component]]
    kind = "segment"
    weight = 0.5
    a = [0.0, 0.0]
    b = [1.0, 1.0]
    breaks = [0.0, 1.0]
    values = [0.7071067811865475]
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .geometry import AtomSet, AxisAlignedPatch, Box, Segment
from .measure import StratifiedMeasure, build_standard_form

_COMPONENT_FIELDS = {
    "atoms": {"kind", "weight", "points", "pmf"},
    "segment": {"kind", "weight", "a", "b", "breaks", "values"},
    "patch": {"kind", "weight", "anchor", "axes", "sides", "pieces"},
    "box": {"kind", "weight", "lo", "hi", "pieces"},
}


@dataclass
class MeasureConfig:
    """Parsed measure file; ``raw`` preserves the document for write-back."""

    raw: dict
    path: Path | None = None

    @property
    def ambient_dim(self) -> int:
        return int(self.raw.get("ambient_dim", 0))

    @property
    def experiment_defaults(self) -> dict:
        return dict(self.raw.get("experiment", {}))

    def component_specs(self):
        specs = []
        for tbl in self.raw.get("component", []):
            specs.append((float(tbl.get("weight", 0.0)), component_from_table(tbl)))
        return specs

    def build(self) -> StratifiedMeasure:
        blocks = self.raw.get("component", [])
        if not blocks:
            raise ConfigError("config declares no [[component]] blocks")
        try:
            measure = build_standard_form(self.component_specs())
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.ambient_dim and measure.ambient_dim != self.ambient_dim:
            raise ConfigError(
                f"ambient_dim = {self.ambient_dim} but components live in "
                f"R^{measure.ambient_dim}"
            )
        return measure


def component_from_table(tbl: dict):
    kind = tbl.get("kind")
    if kind not in _COMPONENT_FIELDS:
        raise ConfigError(f"unknown component kind {kind!r}")
    unknown = set(tbl) - _COMPONENT_FIELDS[kind]
    if unknown:
        raise ConfigError(f"unexpected keys for kind {kind!r}: {sorted(unknown)}")
    try:
        if kind == "atoms":
            return AtomSet(points=tbl["points"], pmf=tbl["pmf"])
        if kind == "segment":
            return Segment(
                a=tbl["a"], b=tbl["b"], breaks=tbl.get("breaks"), values=tbl.get("values")
            )
        if kind == "patch":
            pieces = _pieces_from(tbl.get("pieces"))
            return AxisAlignedPatch(
                anchor=tbl["anchor"], axes=tbl["axes"], sides=tbl["sides"], pieces=pieces
            )
        pieces = _pieces_from(tbl.get("pieces"))
        return Box(lo=tbl["lo"], hi=tbl["hi"], pieces=pieces)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad {kind} component: {exc}") from exc


def _pieces_from(entries):
    if entries is None:
        return None
    return [(e["lo"], e["hi"], e["value"]) for e in entries]


def load_measure_config(path) -> MeasureConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return MeasureConfig(raw=raw, path=path)


def loads_measure_config(text: str) -> MeasureConfig:
    try:
        return MeasureConfig(raw=tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# canonical writer
# ---------------------------------------------------------------------------

def _fmt_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        r = repr(v)
        # repr of round floats lacks a dot only for inf/nan, which TOML forbids
        return r
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise ConfigError(f"cannot serialize scalar {v!r}")


def _fmt_value(v) -> str:
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt_value(x) for x in v) + "]"
    if isinstance(v, dict):
        inner = ", ".join(f"{k} = {_fmt_value(x)}" for k, x in v.items())
        return "{" + inner + "}"
    return _fmt_scalar(v)


def dumps_measure_config(cfg: MeasureConfig) -> str:
    """Canonical TOML text for the config's raw document."""
    lines: list[str] = []
    raw = cfg.raw
    for key, value in raw.items():
        if key in ("component", "experiment"):
            continue
        lines.append(f"{key} = {_fmt_value(value)}")
    if "experiment" in raw:
        lines.append("")
        lines.append("[experiment]")
        for key, value in raw["experiment"].items():
            lines.append(f"{key} = {_fmt_value(value)}")
    for tbl in raw.get("component", []):
        lines.append("")
        lines.append("[[component]]")
        for key, value in tbl.items():
            lines.append(f"{key} = {_fmt_value(value)}")
    return "\n".join(lines) + "\n"


def write_measure_config(cfg: MeasureConfig, path) -> None:
    Path(path).write_text(dumps_measure_config(cfg))
