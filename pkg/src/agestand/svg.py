"""Static SVG line charts with byte-stable output.

Coordinates are written with two decimals and colours come from a fixed
palette assigned in series order, so identical input gives identical
bytes on every platform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union
from xml.sax.saxutils import escape, quoteattr

from .core import PER_100K, RateSeries

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

Y_UNITS = {"per100k": "deaths per 100,000", "fraction": "deaths per person-year", "years": "years"}


@dataclass(frozen=True)
class ChartSpec:
    title: str
    series: Sequence[tuple]  # (label, RateSeries | {year: value})
    y_unit: str = "per100k"
    width: int = 640
    height: int = 400
    palette: Sequence[str] = field(default=PALETTE)

    def __post_init__(self):
        if not self.series:
            raise ValueError("a chart needs at least one series")
        if self.y_unit not in Y_UNITS:
            raise ValueError(f"y_unit must be one of {', '.join(Y_UNITS)}")
        domains = {tuple(_points(s)) for _, s in self.series}
        if len(domains) != 1:
            raise ValueError("all series must share the same years")

    def colour(self, index: int) -> str:
        return self.palette[index % len(self.palette)]


def _points(series: Union[RateSeries, Mapping[int, float]]) -> dict:
    pts = series.points if isinstance(series, RateSeries) else series
    return dict(sorted(pts.items()))


def _fmt(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def nice_ticks(lo: float, hi: float, target: int = 5) -> list:
    """Round-number ticks covering ``[lo, hi]``; ``lo < hi`` required."""
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.floor(lo / step + 1e-9)
    last = math.ceil(hi / step - 1e-9)
    return [round(k * step, 12) for k in range(first, last + 1)]


def _tick_label(v: float, step: float) -> str:
    exp = math.floor(math.log10(step))
    decimals = max(0, -exp + (1 if round(step / 10 ** exp, 6) == 2.5 else 0))
    return f"{v:.{decimals}f}"


def render_svg(spec: ChartSpec) -> str:
    scale = PER_100K if spec.y_unit == "per100k" else 1
    data = [(label, {y: v * scale for y, v in _points(s).items()}) for label, s in spec.series]
    years = list(data[0][1])
    values = [v for _, pts in data for v in pts.values()]
    lo, hi = min(values), max(values)
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        pad = abs(hi) * 0.05 or 1.0
        lo, hi = lo - pad, hi + pad
    ticks = nice_ticks(lo, hi)
    y0, y1 = ticks[0], ticks[-1]
    x0, x1 = years[0], years[-1]
    if x0 == x1:
        x0, x1 = x0 - 1, x1 + 1

    left, right, top, bottom = 70, 20, 40, 50 + 16 * len(data)
    pw, ph = spec.width - left - right, spec.height - top - bottom
    if pw <= 0 or ph <= 0:
        raise ValueError("chart too small for its margins and legend")

    def px(year: float) -> float:
        return left + (year - x0) / (x1 - x0) * pw

    def py(value: float) -> float:
        return top + (y1 - value) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}" '
        'font-family="sans-serif" font-size="11">',
        f'<title>{escape(spec.title)}</title>',
        f'<rect x="0" y="0" width="{spec.width}" height="{spec.height}" fill="#ffffff"/>',
        f'<text x="{spec.width / 2:.2f}" y="20" text-anchor="middle" font-size="13">'
        f'{escape(spec.title)}</text>',
    ]
    step = ticks[1] - ticks[0]
    for t in ticks:
        y = _fmt(py(t))
        out.append(f'<line x1="{left}" y1="{y}" x2="{left + pw}" y2="{y}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{left - 6}" y="{y}" text-anchor="end" dominant-baseline="middle">'
                   f'{_tick_label(t, step)}</text>')
    xstep = max(1, math.ceil(len(years) / 8))
    for yr in years[::xstep]:
        x = _fmt(px(yr))
        out.append(f'<line x1="{x}" y1="{top + ph}" x2="{x}" y2="{top + ph + 4}" stroke="#000000"/>')
        out.append(f'<text x="{x}" y="{top + ph + 16}" text-anchor="middle">{yr}</text>')
    out.append(f'<path d="M{left} {top} V{top + ph} H{left + pw}" fill="none" stroke="#000000"/>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{top + ph + 32}" text-anchor="middle">year</text>')
    out.append(f'<text x="14" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + ph / 2:.2f})">{escape(Y_UNITS[spec.y_unit])}</text>')
    for i, (label, pts) in enumerate(data):
        coords = " ".join(f"{_fmt(px(y))},{_fmt(py(v))}" for y, v in pts.items())
        out.append(f'<polyline points="{coords}" fill="none" stroke="{spec.colour(i)}" '
                   f'stroke-width="2"><title>{escape(label)}</title></polyline>')
    ly = top + ph + 44
    for i, (label, _) in enumerate(data):
        y = ly + 16 * i
        out.append(f'<g class="legend-entry" data-label={quoteattr(label)}>'
                   f'<line x1="{left}" y1="{y}" x2="{left + 20}" y2="{y}" '
                   f'stroke="{spec.colour(i)}" stroke-width="2"/>'
                   f'<text x="{left + 26}" y="{y}" dominant-baseline="middle">{escape(label)}</text></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
