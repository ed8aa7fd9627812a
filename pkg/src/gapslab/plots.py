"""Standalone SVG 1.1 plots: log-log line charts and bar charts."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=55)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{escape(title)}</text>',
    ]


def _frame(xlabel: str, ylabel: str) -> list[str]:
    x0, y0 = MARGIN["left"], HEIGHT - MARGIN["bottom"]
    x1, y1 = WIDTH - MARGIN["right"], MARGIN["top"]
    return [
        f'<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">{escape(xlabel)}</text>',
        f'<text x="16" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:.1f})">{escape(ylabel)}</text>',
    ]


def _range(values, log: bool) -> tuple[float, float]:
    vals = [math.log10(v) if log else v for v in values]
    lo, hi = min(vals), max(vals)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    if log:
        return math.floor(lo), math.ceil(hi)
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def loglog_svg(series: dict, title: str, xlabel: str, ylabel: str) -> str:
    """series maps a label to a list of (x, y) pairs; non-positive points are dropped."""
    clean = {k: [(x, y) for x, y in pts if x > 0 and y > 0] for k, pts in series.items()}
    clean = {k: v for k, v in clean.items() if v}
    out = _header(title) + _frame(xlabel, ylabel)
    if not clean:
        out.append("</svg>")
        return "\n".join(out) + "\n"
    xs = [x for pts in clean.values() for x, _ in pts]
    ys = [y for pts in clean.values() for _, y in pts]
    xlo, xhi = _range(xs, True)
    ylo, yhi = _range(ys, True)
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def px(x: float) -> float:
        return x0 + (math.log10(x) - xlo) / (xhi - xlo) * (x1 - x0)

    def py(y: float) -> float:
        return y0 - (math.log10(y) - ylo) / (yhi - ylo) * (y0 - y1)

    for e in range(int(xlo), int(xhi) + 1):
        x = x0 + (e - xlo) / (xhi - xlo) * (x1 - x0)
        out.append(f'<line x1="{x:.1f}" y1="{y0}" x2="{x:.1f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{y0 + 18}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">1e{e}</text>')
    for e in range(int(ylo), int(yhi) + 1):
        y = y0 - (e - ylo) / (yhi - ylo) * (y0 - y1)
        out.append(f'<line x1="{x0 - 5}" y1="{y:.1f}" x2="{x0}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{y + 4:.1f}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">1e{e}</text>')
    for i, (label, pts) in enumerate(sorted(clean.items())):
        color = COLORS[i % len(COLORS)]
        pts = sorted(pts)
        path = " ".join(f"{'M' if j == 0 else 'L'}{px(x):.2f},{py(y):.2f}" for j, (x, y) in enumerate(pts))
        out.append(f'<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}"/>')
        out.append(f'<text x="{x1 - 5}" y="{y1 + 14 * (i + 1)}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11" fill="{color}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bar_svg(centers, heights, title: str, xlabel: str, ylabel: str) -> str:
    """Bar chart with one bar per (center, height)."""
    out = _header(title) + _frame(xlabel, ylabel)
    centers, heights = list(centers), list(heights)
    if not centers:
        out.append("</svg>")
        return "\n".join(out) + "\n"
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    xlo, xhi = min(centers), max(centers)
    step = (xhi - xlo) / max(len(centers) - 1, 1) if len(centers) > 1 else 1.0
    xlo, xhi = xlo - step / 2, xhi + step / 2
    top = max(max(heights), 1e-300)
    bar_w = max((x1 - x0) * step / (xhi - xlo) * 0.9, 0.5)
    for c, h in zip(centers, heights):
        cx = x0 + (c - xlo) / (xhi - xlo) * (x1 - x0)
        hh = max(h, 0.0) / top * (y0 - y1)
        out.append(f'<rect x="{cx - bar_w / 2:.2f}" y="{y0 - hh:.2f}" width="{bar_w:.2f}" height="{hh:.2f}" '
                   f'fill="{COLORS[0]}"/>')
    for frac in (0.0, 0.5, 1.0):
        x = x0 + frac * (x1 - x0)
        out.append(f'<text x="{x:.1f}" y="{y0 + 18}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{xlo + frac * (xhi - xlo):.4g}</text>')
        y = y0 - frac * (y0 - y1)
        out.append(f'<text x="{x0 - 8}" y="{y + 4:.1f}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{frac * top:.3g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
