"""Dependency-free SVG scatterplots with deterministic output."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .errors import RenderError

WIDTH, HEIGHT = 800, 600
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 60
N_TICKS = 5


def _num(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _tick(v: float) -> str:
    s = format(v, ".4g")
    return "0" if s == "-0" else s


def _axis_range(values: Sequence[float]):
    if not values:
        return 0.0, 1.0
    lo, hi = min(values), max(values)
    span = hi - lo
    if span == 0:
        pad = abs(lo) * 0.05 or 0.5
    else:
        pad = span * 0.05
    return lo - pad, hi + pad


def scatter_svg(points: Sequence, x_label: str = "", y_label: str = "", title: str = "") -> str:
    """SVG text for ``points`` (objects with name, x, y, labeled)."""
    for p in points:
        if not (math.isfinite(p.x) and math.isfinite(p.y)):
            raise RenderError(f"non-finite coordinate for {p.name!r}: ({p.x}, {p.y})")
    x0, x1 = _axis_range([p.x for p in points])
    y0, y1 = _axis_range([p.y for p in points])
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<g class="title"><text x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" '
        f'font-size="16">{escape(title)}</text></g>',
        '<g class="axes" stroke="black" stroke-width="1">',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}"/>',
    ]
    ticks = []
    for i in range(N_TICKS + 1):
        xv = x0 + (x1 - x0) * i / N_TICKS
        yv = y0 + (y1 - y0) * i / N_TICKS
        out.append(f'<line x1="{_num(sx(xv))}" y1="{TOP + ph}" x2="{_num(sx(xv))}" y2="{TOP + ph + 5}"/>')
        out.append(f'<line x1="{LEFT - 5}" y1="{_num(sy(yv))}" x2="{LEFT}" y2="{_num(sy(yv))}"/>')
        ticks.append(f'<text x="{_num(sx(xv))}" y="{TOP + ph + 18}" text-anchor="middle">{_tick(xv)}</text>')
        ticks.append(f'<text x="{LEFT - 8}" y="{_num(sy(yv) + 4)}" text-anchor="end">{_tick(yv)}</text>')
    out.append("</g>")
    out.append('<g class="ticks" font-size="10">')
    out.extend(ticks)
    out.append("</g>")
    out.append(f'<g class="axis-labels" font-size="12">'
               f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(x_label)}</text>'
               f'<text x="18" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.2f})">{escape(y_label)}</text></g>')
    out.append('<g class="points" fill="steelblue" fill-opacity="0.7">')
    for p in points:
        fill = ' fill="firebrick"' if p.labeled else ""
        out.append(f'<circle cx="{_num(sx(p.x))}" cy="{_num(sy(p.y))}" r="3"{fill}/>')
    out.append("</g>")
    out.append('<g class="labels" font-size="9">')
    for p in points:
        if p.labeled:
            out.append(f'<text x="{_num(sx(p.x) + 4)}" y="{_num(sy(p.y) - 4)}">{escape(p.name)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_scatter_svg(points: Sequence, path, x_label: str = "", y_label: str = "",
                     title: str = "") -> Path:
    path = Path(path)
    text = scatter_svg(points, x_label, y_label, title)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
