"""Minimal self-contained SVG plots (presentation only)."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

W, H, PAD = 640, 400, 48


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
    ]


def trajectory_svg(times: Sequence[int], opinions: np.ndarray, manipulator: Sequence[float],
                   title: str = "opinion trajectories") -> str:
    """One polyline per agent over time, dashed line for the manipulator group."""
    times = np.asarray(times, dtype=float)
    ops = np.asarray(opinions, dtype=float)  # shape (n_snapshots, N)
    t_max = max(times.max(), 1.0)

    def px(t):
        return PAD + (W - 2 * PAD) * t / t_max

    def py(x):
        return H - PAD - (H - 2 * PAD) * (x + 1.0) / 2.0

    out = _header(title)
    out.append(f'<rect x="{PAD}" y="{PAD}" width="{W - 2 * PAD}" height="{H - 2 * PAD}" fill="none" stroke="black"/>')
    for label, y in (("1", 1.0), ("0", 0.0), ("-1", -1.0)):
        out.append(f'<text x="{PAD - 6}" y="{py(y) + 4:.1f}" text-anchor="end" font-size="11">{label}</text>')
    out.append(f'<text x="{W - PAD}" y="{H - PAD + 16}" text-anchor="end" font-size="11">t={int(t_max)}</text>')
    for j in range(ops.shape[1]):
        pts = " ".join(f"{px(t):.1f},{py(x):.1f}" for t, x in zip(times, ops[:, j]))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="0.6"/>')
    if len(manipulator):
        pts = " ".join(f"{px(t):.1f},{py(x):.1f}" for t, x in zip(times, manipulator))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#d62728" stroke-width="1.5" stroke-dasharray="5,4"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _color(v: float, lo: float, hi: float) -> str:
    s = 0.0 if hi <= lo else (v - lo) / (hi - lo)
    s = min(max(s, 0.0), 1.0)
    # dark blue -> yellow
    r = int(30 + 225 * s)
    g = int(30 + 200 * s)
    b = int(120 * (1 - s))
    return f"rgb({r},{g},{b})"


def heatmap_svg(values: np.ndarray, k_values: Sequence[int], tdelta_values: Sequence[int],
                title: str) -> str:
    """Cells coloured by value; x axis t_delta, y axis K (increasing upward)."""
    vals = np.asarray(values, dtype=float)
    nk, nt = vals.shape
    lo, hi = float(np.nanmin(vals)), float(np.nanmax(vals))
    cw = (W - 2 * PAD) / max(nt, 1)
    ch = (H - 2 * PAD) / max(nk, 1)
    out = _header(f"{title}  [{lo:.3g}, {hi:.3g}]")
    for i in range(nk):
        for j in range(nt):
            x = PAD + j * cw
            y = H - PAD - (i + 1) * ch
            out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.3:.2f}" height="{ch + 0.3:.2f}" '
                       f'fill="{_color(vals[i, j], lo, hi)}"/>')
    out.append(f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle" font-size="12">'
               f't_delta {tdelta_values[0]}..{tdelta_values[-1]}</text>')
    out.append(f'<text x="14" y="{H / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 14 {H / 2})">K {k_values[0]}..{k_values[-1]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
