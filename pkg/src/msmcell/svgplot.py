"""Minimal text-only SVG line charts for sweep tables."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .sweep import CLAMPED, FREE

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=90, right=200, top=50, bottom=70)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _nice_ticks(lo, hi, count=6):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step + 1e-9) + 1)]


def _log_ticks(lo, hi):
    ticks = [10.0**k for k in range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)]
    ticks = [t for t in ticks if lo * (1 - 1e-12) <= t <= hi * (1 + 1e-12)]
    return ticks or [lo, hi]


def _fmt(v):
    if v == 0:
        return "0"
    if 1e-3 <= abs(v) < 1e4:
        return f"{v:.4g}"
    return f"{v:.1e}"


def line_plot(series, path, title="", xlabel="", ylabel="", logx=False):
    """Write an 800 x 600 SVG with one polyline (plus markers) per series.

    ``series`` is a list of (label, xs, ys).
    """
    series = [(lab, np.asarray(x, float), np.asarray(y, float)) for lab, x, y in series if len(x)]
    xs = np.concatenate([s[1] for s in series]) if series else np.array([1.0])
    ys = np.concatenate([s[2] for s in series]) if series else np.array([0.0])
    tx = np.log10 if logx else (lambda v: v)
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi == x_lo:
        x_lo, x_hi = (x_lo / 2, x_lo * 2) if logx else (x_lo - 1, x_hi + 1)
    if y_hi == y_lo:
        pad = abs(y_lo) * 0.1 or 1.0
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        pad = 0.05 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    X0, X1 = tx(x_lo), tx(x_hi)

    def px(x):
        return MARGIN["left"] + (tx(x) - X0) / (X1 - X0) * pw

    def py(y):
        return MARGIN["top"] + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2 - MARGIN["right"] / 2}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    xticks = _log_ticks(x_lo, x_hi) if logx else _nice_ticks(x_lo, x_hi)
    for t in xticks:
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{MARGIN["top"] + ph}" x2="{x:.2f}" y2="{MARGIN["top"] + ph + 6}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{MARGIN["top"] + ph + 22}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        y = py(t)
        out.append(f'<line x1="{MARGIN["left"] - 6}" y1="{y:.2f}" x2="{MARGIN["left"]}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 10}" y="{y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(
        f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 20}" text-anchor="middle">{escape(xlabel)}</text>'
    )
    out.append(
        f'<text x="22" y="{MARGIN["top"] + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 22 {MARGIN["top"] + ph / 2})">{escape(ylabel)}</text>'
    )
    for k, (label, x, y) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        dash = ' stroke-dasharray="6 4"' if "clamped" in label else ""
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash}/>')
        for a, b in zip(x, y):
            out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="{color}"/>')
        ly = MARGIN["top"] + 10 + 20 * k
        lx = WIDTH - MARGIN["right"] + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _groups(records, column, modes):
    keys = sorted({(r.assignment, r.beta_mode) for r in records if r.beta_mode in modes})
    series = []
    for assignment, mode in keys:
        rows = sorted(
            (r for r in records if r.assignment == assignment and r.beta_mode == mode),
            key=lambda r: r.sweep_value,
        )
        series.append(
            (
                f"phases {assignment} {mode}",
                [r.sweep_value for r in rows],
                [getattr(r, column) for r in rows],
            )
        )
    return series


def plot_records(records, out_dir):
    """Energy, strain and work-output plots; returns the written paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    param = records[0].sweep_param if records else "value"
    logx = param == "polymer_E" and all(r.sweep_value > 0 for r in records)
    xlabel = "polymer Young modulus E [MPa]" if param == "polymer_E" else param
    plots = [
        ("energy.svg", "Energy density", "E_total_MPa", (FREE, CLAMPED), "energy [MPa]"),
        ("strain.svg", "Spontaneous strain along field", "strain_along_field", (FREE,), "strain"),
        ("work_output.svg", "Work output", "work_output_MPa", (FREE,), "work output [MPa]"),
    ]
    paths = []
    for name, title, column, modes, ylabel in plots:
        path = os.path.join(out_dir, name)
        line_plot(_groups(records, column, modes), path, title, xlabel, ylabel, logx)
        paths.append(path)
    return paths
