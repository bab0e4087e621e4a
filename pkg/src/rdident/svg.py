"""Bare-bones SVG line charts, enough to eyeball a run without a plot library."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .io import atomic_write_text

PALETTE = ("#f2c400", "#f08a00", "#d62020", "#7cc242", "#1a7a2e", "#3060c0", "#8040a0", "#505050")


@dataclass
class Series:
    x: list
    y: list
    label: str = ""
    color: str = "#000000"
    dashed: bool = False
    width: float = 1.5


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    out, k = [], 0
    while first + k * step <= hi + 1e-12 * step:
        out.append(first + k * step)
        k += 1
    return out


def line_chart(path, series, title="", xlabel="", ylabel="", logy=False, size=(640, 420)):
    W, H = size
    left, right, top, bottom = 70, 150, 40, 50
    pts = [(x, y) for s in series for x, y in zip(s.x, s.y)
           if math.isfinite(x) and math.isfinite(y) and (y > 0 or not logy)]
    if not pts:
        pts = [(0.0, 1.0), (1.0, 2.0)]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    tr = (lambda y: math.log10(y)) if logy else (lambda y: y)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(map(tr, ys)), max(map(tr, ys))
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return left + (x - x0) / (x1 - x0) * (W - left - right)

    def py(y):
        return top + (y1 - tr(y)) / (y1 - y0) * (H - top - bottom)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{W - left - right}" height="{H - top - bottom}" fill="none" stroke="#888"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{H - bottom}" x2="{px(t):.2f}" y2="{H - bottom + 5}" stroke="#888"/>')
        out.append(f'<text x="{px(t):.2f}" y="{H - bottom + 18}" font-size="11" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        label = f"1e{t:.0f}" if logy else f"{t:.3g}"
        if logy and abs(t - round(t)) > 1e-9:
            continue
        yy = top + (y1 - t) / (y1 - y0) * (H - top - bottom)
        out.append(f'<line x1="{left - 5}" y1="{yy:.2f}" x2="{left}" y2="{yy:.2f}" stroke="#888"/>')
        out.append(f'<text x="{left - 8}" y="{yy + 4:.2f}" font-size="11" text-anchor="end">{label}</text>')
    for k, s in enumerate(series):
        seg = [(px(x), py(y)) for x, y in zip(s.x, s.y)
               if math.isfinite(x) and math.isfinite(y) and (y > 0 or not logy)]
        if len(seg) >= 2:
            d = " ".join(f"{a:.2f},{b:.2f}" for a, b in seg)
            dash = ' stroke-dasharray="6,4"' if s.dashed else ""
            out.append(f'<polyline points="{d}" fill="none" stroke="{s.color}" stroke-width="{s.width}"{dash}/>')
        if s.label:
            ly = top + 16 * k + 10
            out.append(f'<line x1="{W - right + 10}" y1="{ly}" x2="{W - right + 30}" y2="{ly}" stroke="{s.color}" stroke-width="2"/>')
            out.append(f'<text x="{W - right + 35}" y="{ly + 4}" font-size="11">{escape(s.label)}</text>')
    out.append(f'<text x="{W / 2:.0f}" y="22" font-size="14" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{(left + W - right) / 2:.0f}" y="{H - 10}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{H / 2:.0f}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {H / 2:.0f})">{escape(ylabel)}</text>')
    out.append("</svg>")
    atomic_write_text(path, "\n".join(out) + "\n")
