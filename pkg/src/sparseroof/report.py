"""Joins speedup records with measured accuracy and emits plot-ready files.

Accuracy is always ingested, never predicted or interpolated: each
(model, pattern, level) point must have been fine-tuned and evaluated
externally. Outputs are bit-deterministic CSV/JSON plus minimal
self-contained SVG charts (accuracy vs. speedup, and a classic log-log
roofline mode).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .cost import parse_pattern_token
from .errors import DataError
from .hardware import EngineClass, HardwareProfile, knee_ai
from .roofline import SpeedupRecord

# All floating-point output is fixed at 6 significant digits so identical
# inputs always produce byte-identical files.


def fmt6(x: float) -> str:
    return f"{x:.6g}"


@dataclass(frozen=True)
class AccuracyRecord:
    model: str
    pattern: str
    level: float
    top1: float

    def __post_init__(self):
        if not (0.0 <= self.top1 <= 1.0):
            raise DataError(
                f"accuracy for ({self.model}, {self.pattern}, {self.level:g}) "
                f"must be in [0, 1], got {self.top1}"
            )

    @property
    def key(self) -> tuple[str, str, float]:
        return (self.model, self.pattern, round(self.level, 9))


@dataclass(frozen=True)
class SeriesPoint:
    level: float
    speedup: float
    top1: float
    label: str

    def __post_init__(self):
        if self.speedup <= 0:
            raise DataError(f"speedup must be > 0, got {self.speedup}")


@dataclass(frozen=True)
class Series:
    model: str
    pattern: str
    points: tuple[SeriesPoint, ...]

    @property
    def name(self) -> str:
        return f"{self.model}/{self.pattern}"


@dataclass(frozen=True)
class AssembledSeries:
    series: tuple[Series, ...]
    unjoined: tuple[SpeedupRecord, ...]


_ACCURACY_HEADER = ["model", "pattern", "level", "top1"]


def load_accuracy(path: str | Path) -> list[AccuracyRecord]:
    """Load and validate an accuracy CSV (columns: model,pattern,level,top1)."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read accuracy file '{p}': {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or [c.strip() for c in rows[0]] != _ACCURACY_HEADER:
        raise DataError(f"{p}: expected header '{','.join(_ACCURACY_HEADER)}'")
    records: list[AccuracyRecord] = []
    seen: set[tuple[str, str, float]] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise DataError(f"{p}:{lineno}: expected 4 columns, got {len(row)}")
        model, pattern, level_s, top1_s = (c.strip() for c in row)
        try:
            level = float(level_s)
            top1 = float(top1_s)
        except ValueError:
            raise DataError(f"{p}:{lineno}: level and top1 must be numbers") from None
        # Validates the pattern token / level combination.
        parse_pattern_token(pattern, level)
        rec = AccuracyRecord(model=model, pattern=pattern, level=level, top1=top1)
        if rec.key in seen:
            raise DataError(
                f"{p}:{lineno}: duplicate accuracy record for "
                f"({model}, {pattern}, {level:g})"
            )
        seen.add(rec.key)
        records.append(rec)
    return records


def assemble_series(
    speedups: Sequence[SpeedupRecord], accuracy: Sequence[AccuracyRecord]
) -> AssembledSeries:
    """Join speedups with accuracy into one series per (model, pattern).

    Points are ordered by level. Speedup records without a matching accuracy
    record are returned in ``unjoined`` rather than dropped. An empty join is
    an error.
    """
    acc_by_key = {rec.key: rec for rec in accuracy}
    grouped: dict[tuple[str, str], list[SeriesPoint]] = {}
    unjoined: list[SpeedupRecord] = []
    for rec in speedups:
        key = (rec.model, rec.config.pattern_token, round(rec.config.level, 9))
        acc = acc_by_key.get(key)
        if acc is None:
            unjoined.append(rec)
            continue
        grouped.setdefault((rec.model, rec.config.pattern_token), []).append(
            SeriesPoint(
                level=rec.config.level,
                speedup=rec.speedup,
                top1=acc.top1,
                label=rec.config.token,
            )
        )
    if not grouped:
        raise DataError(
            f"accuracy join produced no points ({len(speedups)} speedup records, "
            f"{len(accuracy)} accuracy records share no (model, pattern, level) keys)"
        )
    series = tuple(
        Series(model=model, pattern=pattern,
               points=tuple(sorted(points, key=lambda pt: pt.level)))
        for (model, pattern), points in sorted(grouped.items())
    )
    return AssembledSeries(series=series, unjoined=tuple(unjoined))


# -- emission -----------------------------------------------------------------

_SERIES_HEADER = ["model", "pattern", "level", "speedup", "top1"]


def write_series_csv(series: Sequence[Series], path: str | Path) -> Path:
    p = Path(path)
    lines = [",".join(_SERIES_HEADER)]
    for s in series:
        for pt in s.points:
            lines.append(
                f"{s.model},{s.pattern},{fmt6(pt.level)},{fmt6(pt.speedup)},{fmt6(pt.top1)}"
            )
    p.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return p


def read_series_csv(path: str | Path) -> list[Series]:
    """Parse a file produced by write_series_csv back into series."""
    p = Path(path)
    reader = csv.reader(io.StringIO(p.read_text(encoding="utf-8")))
    rows = [row for row in reader if row]
    if not rows or rows[0] != _SERIES_HEADER:
        raise DataError(f"{p}: expected header '{','.join(_SERIES_HEADER)}'")
    grouped: dict[tuple[str, str], list[SeriesPoint]] = {}
    for row in rows[1:]:
        model, pattern, level_s, speedup_s, top1_s = row
        level = float(level_s)
        cfg = parse_pattern_token(pattern, level)
        grouped.setdefault((model, pattern), []).append(
            SeriesPoint(level=level, speedup=float(speedup_s), top1=float(top1_s),
                        label=cfg.token)
        )
    return [
        Series(model=model, pattern=pattern, points=tuple(points))
        for (model, pattern), points in sorted(grouped.items())
    ]


def write_series_json(series: Sequence[Series], path: str | Path) -> Path:
    p = Path(path)
    payload = [
        {
            "model": s.model,
            "pattern": s.pattern,
            "points": [
                {
                    "level": float(fmt6(pt.level)),
                    "speedup": float(fmt6(pt.speedup)),
                    "top1": float(fmt6(pt.top1)),
                }
                for pt in s.points
            ],
        }
        for s in series
    ]
    p.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8", newline="\n")
    return p


def write_unjoined_csv(unjoined: Sequence[SpeedupRecord], path: str | Path) -> Path:
    p = Path(path)
    lines = ["model,pattern,level,speedup"]
    for rec in unjoined:
        lines.append(
            f"{rec.model},{rec.config.pattern_token},{fmt6(rec.config.level)},{fmt6(rec.speedup)}"
        )
    p.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return p


_PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 20, 50


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if raw <= step:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _svg_header(width: int, height: int) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def write_series_svg(
    series: Sequence[Series],
    path: str | Path,
    width: int = 640,
    height: int = 480,
) -> Path:
    """Accuracy (y) vs. speedup (x) chart, one polyline per series.

    The x axis is linear and always includes the 1.0 dense baseline, which is
    marked with a dashed reference line.
    """
    if not series:
        raise DataError("cannot render SVG from an empty series list")
    p = Path(path)
    xs = [pt.speedup for s in series for pt in s.points]
    ys = [pt.top1 for s in series for pt in s.points]
    x_lo, x_hi = min(1.0, min(xs)), max(1.0, max(xs))
    y_lo, y_hi = min(ys), max(ys)
    x_pad = (x_hi - x_lo) * 0.05 or 0.1
    y_pad = (y_hi - y_lo) * 0.05 or 0.05
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = max(0.0, y_lo - y_pad), min(1.0, y_hi + y_pad)

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> str:
        return f"{_MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w:.2f}"

    def sy(y: float) -> str:
        return f"{_MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h:.2f}"

    out = _svg_header(width, height)
    x0, y0 = _MARGIN_L, _MARGIN_T + plot_h
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{_MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>')
    for t in _nice_ticks(x_lo, x_hi):
        out.append(f'<line x1="{sx(t)}" y1="{y0}" x2="{sx(t)}" y2="{y0 + 4}" stroke="black"/>')
        out.append(
            f'<text x="{sx(t)}" y="{y0 + 16}" font-size="10" text-anchor="middle">{fmt6(t)}</text>'
        )
    for t in _nice_ticks(y_lo, y_hi):
        out.append(f'<line x1="{x0 - 4}" y1="{sy(t)}" x2="{x0}" y2="{sy(t)}" stroke="black"/>')
        out.append(
            f'<text x="{x0 - 6}" y="{sy(t)}" font-size="10" text-anchor="end" '
            f'dominant-baseline="middle">{fmt6(t)}</text>'
        )
    # Dense baseline reference at speedup 1.0.
    out.append(
        f'<line x1="{sx(1.0)}" y1="{_MARGIN_T}" x2="{sx(1.0)}" y2="{y0}" '
        'stroke="gray" stroke-dasharray="4 3"/>'
    )
    out.append(
        f'<text x="{sx(1.0)}" y="{_MARGIN_T + 10}" font-size="10" fill="gray">dense</text>'
    )
    out.append(
        f'<text x="{x0 + plot_w / 2:.2f}" y="{height - 12}" font-size="12" '
        'text-anchor="middle">speedup at speed of light (sparse over dense)</text>'
    )
    out.append(
        f'<text x="16" y="{_MARGIN_T + plot_h / 2:.2f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {_MARGIN_T + plot_h / 2:.2f})">top-1 accuracy</text>'
    )
    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{sx(pt.speedup)},{sy(pt.top1)}" for pt in s.points)
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for pt in s.points:
            out.append(f'<circle cx="{sx(pt.speedup)}" cy="{sy(pt.top1)}" r="3" fill="{color}"/>')
        ly = _MARGIN_T + 14 + i * 14
        out.append(
            f'<rect x="{x0 + plot_w - 150}" y="{ly - 8}" width="10" height="10" fill="{color}"/>'
        )
        out.append(
            f'<text x="{x0 + plot_w - 136}" y="{ly}" font-size="10">{s.name}</text>'
        )
    out.append("</svg>")
    p.write_text("\n".join(out) + "\n", encoding="utf-8", newline="\n")
    return p


@dataclass(frozen=True)
class RooflinePoint:
    label: str
    ai: float
    achieved_flops: float


def write_roofline_svg(
    profile: HardwareProfile,
    engines: Sequence[EngineClass],
    points: Sequence[RooflinePoint],
    path: str | Path,
    width: int = 640,
    height: int = 480,
) -> Path:
    """Classic log-log roofline chart: roof segments per engine plus points.

    Each roof polyline kinks exactly at that engine's knee.
    """
    p = Path(path)
    if not engines:
        raise DataError("roofline chart needs at least one engine")
    knees = [knee_ai(profile, e) for e in engines]
    peaks = [profile.peak_for(e) for e in engines]
    ais = [pt.ai for pt in points] + knees
    x_lo = 10.0 ** math.floor(math.log10(min(ais)) - 0.5)
    x_hi = 10.0 ** math.ceil(math.log10(max(ais)) + 0.5)
    flops_vals = [pt.achieved_flops for pt in points] + peaks + [x_lo * profile.peak_mem_bw]
    y_lo = 10.0 ** math.floor(math.log10(min(flops_vals)))
    y_hi = 10.0 ** math.ceil(math.log10(max(flops_vals)))

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B
    lx_lo, lx_hi = math.log10(x_lo), math.log10(x_hi)
    ly_lo, ly_hi = math.log10(y_lo), math.log10(y_hi)

    def sx(x: float) -> str:
        return f"{_MARGIN_L + (math.log10(x) - lx_lo) / (lx_hi - lx_lo) * plot_w:.2f}"

    def sy(y: float) -> str:
        return f"{_MARGIN_T + (ly_hi - math.log10(y)) / (ly_hi - ly_lo) * plot_h:.2f}"

    out = _svg_header(width, height)
    x0, y0 = _MARGIN_L, _MARGIN_T + plot_h
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{_MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>')
    d = math.floor(lx_lo)
    while d <= math.ceil(lx_hi):
        t = 10.0 ** d
        if x_lo <= t <= x_hi:
            out.append(f'<line x1="{sx(t)}" y1="{y0}" x2="{sx(t)}" y2="{y0 + 4}" stroke="black"/>')
            out.append(
                f'<text x="{sx(t)}" y="{y0 + 16}" font-size="10" text-anchor="middle">1e{d}</text>'
            )
        d += 1
    d = math.floor(ly_lo)
    while d <= math.ceil(ly_hi):
        t = 10.0 ** d
        if y_lo <= t <= y_hi:
            out.append(f'<line x1="{x0 - 4}" y1="{sy(t)}" x2="{x0}" y2="{sy(t)}" stroke="black"/>')
            out.append(
                f'<text x="{x0 - 6}" y="{sy(t)}" font-size="10" text-anchor="end" '
                f'dominant-baseline="middle">1e{d}</text>'
            )
        d += 1
    out.append(
        f'<text x="{x0 + plot_w / 2:.2f}" y="{height - 12}" font-size="12" '
        'text-anchor="middle">arithmetic intensity (FLOP/byte)</text>'
    )
    out.append(
        f'<text x="16" y="{_MARGIN_T + plot_h / 2:.2f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {_MARGIN_T + plot_h / 2:.2f})">throughput (FLOP/s)</text>'
    )
    dashes = ["none", "6 3", "2 2"]
    for i, engine in enumerate(engines):
        knee = knees[i]
        peak = peaks[i]
        pts = f"{sx(x_lo)},{sy(x_lo * profile.peak_mem_bw)} {sx(knee)},{sy(peak)} {sx(x_hi)},{sy(peak)}"
        dash = dashes[i % len(dashes)]
        extra = "" if dash == "none" else f' stroke-dasharray="{dash}"'
        out.append(
            f'<polyline class="roof" points="{pts}" fill="none" stroke="black" '
            f'stroke-width="1.5"{extra}/>'
        )
        out.append(
            f'<text x="{sx(knee)}" y="{float(sy(peak)) - 6:.2f}" font-size="10">'
            f"{engine.value} peak {fmt6(peak)}</text>"
        )
    for i, pt in enumerate(points):
        color = _PALETTE[i % len(_PALETTE)]
        out.append(
            f'<circle cx="{sx(pt.ai)}" cy="{sy(pt.achieved_flops)}" r="3.5" fill="{color}">'
            f"<title>{pt.label}</title></circle>"
        )
    out.append("</svg>")
    p.write_text("\n".join(out) + "\n", encoding="utf-8", newline="\n")
    return p


def emit(
    series: Sequence[Series],
    fmt: str,
    path: str | Path,
    *,
    svg_width: int = 640,
    svg_height: int = 480,
) -> Path:
    """Write series in one of the supported formats: csv, json, or svg."""
    if fmt == "csv":
        return write_series_csv(series, path)
    if fmt == "json":
        return write_series_json(series, path)
    if fmt == "svg":
        return write_series_svg(series, path, width=svg_width, height=svg_height)
    raise DataError(f"unsupported output format '{fmt}' (expected csv, json, or svg)")
