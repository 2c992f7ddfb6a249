"""Standalone SVG line charts (no rendering dependency)."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 720, 360
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi == lo:
        return np.array([lo])
    return np.linspace(lo, hi, n)


def equity_svg(dates, equity, title: str) -> str:
    """Cumulative-return chart with labelled axes, first/last date on the x axis."""
    y = np.asarray(equity, dtype=float)
    n = y.size
    lo, hi = float(y.min()), float(y.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(i):
        return LEFT + (pw * i / (n - 1) if n > 1 else pw / 2)

    def py(v):
        return TOP + ph * (hi - v) / (hi - lo)

    points = " ".join(f"{px(i):.2f},{py(v):.2f}" for i, v in enumerate(y))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for v in _ticks(lo, hi):
        yy = py(v)
        parts.append(f'<line x1="{LEFT - 4}" y1="{yy:.2f}" x2="{LEFT}" y2="{yy:.2f}" stroke="black"/>')
        parts.append(f'<text x="{LEFT - 6}" y="{yy + 4:.2f}" text-anchor="end">{v:.4g}</text>')
    if n:
        first, last = str(dates[0]), str(dates[-1])
        parts.append(f'<text x="{LEFT}" y="{TOP + ph + 18}" text-anchor="start">{escape(first)}</text>')
        parts.append(f'<text x="{LEFT + pw}" y="{TOP + ph + 18}" text-anchor="end">{escape(last)}</text>')
    parts.append(f'<text x="{LEFT + pw / 2:.0f}" y="{HEIGHT - 10}" text-anchor="middle">date</text>')
    parts.append(
        f'<text x="16" y="{TOP + ph / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.0f})">equity (1 + cumulative pnl)</text>'
    )
    if n:
        parts.append(f'<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{points}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_equity_svg(path, dates, equity, title: str) -> None:
    with open(path, "w") as fh:
        fh.write(equity_svg(dates, equity, title))
