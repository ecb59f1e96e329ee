"""Standalone SVG line charts.

Output is a pure function of the ChartSpec: fixed 800x500 viewport, fixed
palette order, fixed number formatting. Each polyline carries its source
years and values in ``data-years`` / ``data-values`` attributes so a chart
can be checked against the CSV it was drawn from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

from .errors import ArgumentError
from .panel import format_float

WIDTH, HEIGHT = 800, 500
LEFT, RIGHT, TOP, BOTTOM = 70, 780, 60, 440
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")
DASHES = ("", "6,4", "2,3", "8,3,2,3")


@dataclass(frozen=True)
class ChartSpec:
    title: str
    series: Sequence[tuple[str, Mapping[int, float]]]
    vertical_marker_year: int | None = None
    x_label: str = "year"
    y_label: str = ""
    years: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if not self.series:
            raise ArgumentError("chart needs at least one series")
        common = set(self.series[0][1])
        for _, data in self.series[1:]:
            common &= set(data)
        if not common:
            raise ArgumentError("series share no years")
        years = tuple(sorted(common))
        for label, data in self.series:
            for y in years:
                if not math.isfinite(data[y]):
                    raise ArgumentError(f"series {label!r} has a non-finite value in {y}")
        if self.vertical_marker_year is not None and not years[0] <= self.vertical_marker_year <= years[-1]:
            raise ArgumentError(f"marker year {self.vertical_marker_year} outside {years[0]}-{years[-1]}")
        object.__setattr__(self, "years", years)


def _nice_step(span: float, target: int = 5) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def _y_ticks(lo: float, hi: float) -> tuple[float, float, list[float]]:
    if hi == lo:
        pad = abs(lo) * 0.1 or 1.0
        lo, hi = lo - pad, hi + pad
    step = _nice_step(hi - lo)
    start = math.floor(lo / step) * step
    stop = math.ceil(hi / step) * step
    n = int(round((stop - start) / step))
    return start, stop, [start + i * step for i in range(n + 1)]


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def render_svg(spec: ChartSpec) -> str:
    years = spec.years
    values = [v for _, d in spec.series for v in (d[y] for y in years)]
    y_lo, y_hi, ticks = _y_ticks(min(values), max(values))
    x0, x1 = years[0], years[-1]

    def px(year: float) -> float:
        if x1 == x0:
            return (LEFT + RIGHT) / 2
        return LEFT + (year - x0) / (x1 - x0) * (RIGHT - LEFT)

    def py(v: float) -> float:
        return BOTTOM - (v - y_lo) / (y_hi - y_lo) * (BOTTOM - TOP)

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.2f}" y="30" font-size="16" text-anchor="middle">{escape(spec.title)}</text>',
        '<g class="axes" stroke="#000000" stroke-width="1">',
        f'<line x1="{LEFT}" y1="{BOTTOM}" x2="{RIGHT}" y2="{BOTTOM}"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{BOTTOM}"/>',
        "</g>",
    ]

    step = max(1, math.ceil(len(years) / 11))
    out.append('<g class="x-ticks" font-size="11" text-anchor="middle">')
    for y in years[::step]:
        x = px(y)
        out.append(f'<line x1="{x:.2f}" y1="{BOTTOM}" x2="{x:.2f}" y2="{BOTTOM + 5}" stroke="#000000"/>')
        out.append(f'<text x="{x:.2f}" y="{BOTTOM + 18}">{y}</text>')
    out.append("</g>")

    out.append('<g class="y-ticks" font-size="11" text-anchor="end">')
    for t in ticks:
        y = py(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="#000000"/>')
        out.append(f'<line x1="{LEFT}" y1="{y:.2f}" x2="{RIGHT}" y2="{y:.2f}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}">{_fmt(t)}</text>')
    out.append("</g>")

    out.append(f'<text x="{(LEFT + RIGHT) / 2:.2f}" y="{HEIGHT - 20}" font-size="12" '
               f'text-anchor="middle">{escape(spec.x_label)}</text>')
    if spec.y_label:
        cy = (TOP + BOTTOM) / 2
        out.append(f'<text x="18" y="{cy:.2f}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 18 {cy:.2f})">{escape(spec.y_label)}</text>')

    if spec.vertical_marker_year is not None:
        x = px(spec.vertical_marker_year)
        out.append(f'<line class="marker" x1="{x:.2f}" y1="{TOP}" x2="{x:.2f}" y2="{BOTTOM}" '
                   f'stroke="#555555" stroke-width="1" stroke-dasharray="5,5"/>')

    for k, (label, data) in enumerate(spec.series):
        color = PALETTE[k % len(PALETTE)]
        dash = DASHES[k % len(DASHES)]
        pts = " ".join(f"{px(y):.2f},{py(data[y]):.2f}" for y in years)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(
            f'<polyline class="series" data-label={quoteattr(label)} '
            f'data-years="{" ".join(str(y) for y in years)}" '
            f'data-values="{" ".join(format_float(data[y]) for y in years)}" '
            f'points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash_attr}/>'
        )

    out.append('<g class="legend" font-size="12">')
    for k, (label, _) in enumerate(spec.series):
        ly = TOP + 12 + 18 * k
        color = PALETTE[k % len(PALETTE)]
        dash = DASHES[k % len(DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<line x1="{RIGHT - 170}" y1="{ly}" x2="{RIGHT - 140}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"{dash_attr}/>')
        out.append(f'<text x="{RIGHT - 132}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_chart(spec: ChartSpec, path) -> None:
    Path(path).write_text(render_svg(spec), encoding="utf-8")


def series_from(years: Sequence[int], values: Sequence[float]) -> dict[int, float]:
    return {int(y): float(v) for y, v in zip(years, values)}
