"""Tiny SVG writer for path drawings and line plots. No plotting dependency."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

_HEAD = '<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _scaler(lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return lambda v: out_lo + (np.asarray(v, dtype=float) - lo) * (out_hi - out_lo) / span


def paths_svg(paths: Sequence[tuple[np.ndarray, np.ndarray, bool]], width: int = 600, height: int = 600,
              mapping: str = "linear", eps: float = 1.0) -> str:
    """Render (times, positions, dashed) triples; time runs upwards.

    mapping='theta' sends the rescaled point (eps x, eps^2 t) through the
    compactification (tanh(x)/(1+|t|), tanh(t)) before scaling to the canvas.
    """
    if mapping not in ("linear", "theta"):
        raise ValueError("mapping must be 'linear' or 'theta'")
    pts = []
    for t, x, dashed in paths:
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if mapping == "theta":
            tt = eps**2 * t
            u = np.tanh(eps * x) / (1.0 + np.abs(tt))
            v = np.tanh(tt)
        else:
            u, v = x, t
        pts.append((u, v, dashed))
    if not pts:
        raise ValueError("nothing to draw")
    allu = np.concatenate([p[0] for p in pts])
    allv = np.concatenate([p[1] for p in pts])
    pad = 20
    sx = _scaler(allu.min(), allu.max(), pad, width - pad)
    sy = _scaler(allv.min(), allv.max(), height - pad, pad)
    out = [_HEAD.format(w=width, h=height), '<rect width="100%" height="100%" fill="white"/>\n']
    for u, v, dashed in pts:
        coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(sx(u), sy(v)))
        style = 'stroke="#c0392b" stroke-dasharray="4,3"' if dashed else 'stroke="#1f3a93"'
        out.append(f'<polyline points="{coords}" fill="none" {style} stroke-width="0.8"/>\n')
    out.append("</svg>\n")
    return "".join(out)


def line_plot_svg(x: Iterable[float], y: Iterable[float], width: int = 600, height: int = 400,
                  xlabel: str = "", ylabel: str = "") -> str:
    x = np.asarray(list(x), dtype=float)
    y = np.asarray(list(y), dtype=float)
    if x.size != y.size or x.size == 0:
        raise ValueError("x and y must be nonempty and of equal length")
    pad = 50
    ylo, yhi = float(y.min()), float(y.max())
    if math.isclose(ylo, yhi):
        ylo, yhi = ylo - 1.0, yhi + 1.0
    sx = _scaler(float(x.min()), float(x.max()), pad, width - pad / 2)
    sy = _scaler(ylo, yhi, height - pad, pad / 2)
    coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(sx(x), sy(y)))
    out = [_HEAD.format(w=width, h=height), '<rect width="100%" height="100%" fill="white"/>\n']
    x0, y0 = pad, height - pad
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{width - pad / 2}" y2="{y0}" stroke="black"/>\n')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{pad / 2}" stroke="black"/>\n')
    for val, pos in ((x.min(), sx(x.min())), (x.max(), sx(x.max()))):
        out.append(f'<text x="{_fmt(pos)}" y="{y0 + 15}" font-size="10" text-anchor="middle">{val:.4g}</text>\n')
    for val, pos in ((ylo, sy(ylo)), (yhi, sy(yhi))):
        out.append(f'<text x="{x0 - 5}" y="{_fmt(pos)}" font-size="10" text-anchor="end">{val:.4g}</text>\n')
    if xlabel:
        out.append(f'<text x="{width / 2}" y="{height - 10}" font-size="12" text-anchor="middle">{xlabel}</text>\n')
    if ylabel:
        out.append(f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})" '
                   f'text-anchor="middle">{ylabel}</text>\n')
    out.append(f'<polyline points="{coords}" fill="none" stroke="#1f3a93" stroke-width="1.5"/>\n')
    out.append("</svg>\n")
    return "".join(out)
