"""Histogram-with-fitted-densities figures.

:func:`render_report` writes a small self-contained SVG by hand (bars,
one ``<polyline>`` per fitted density, a legend in BIC order). The
``plot_*`` helpers draw the same material, and the raw series plots, with
matplotlib for PNG/PDF output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from muxstat import distcat
from muxstat.distcat import DistributionFamily
from muxstat.errors import DomainError
from muxstat.mlefit import CATALOG, FitResult
from muxstat.series import BitrateSeries, HistogramView

CURVE_POINTS = 240
PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
BAR_COLOR = "#c7c7c7"


@dataclass(frozen=True)
class ReportBundle:
    histogram: HistogramView
    overlays: tuple[FitResult, ...] = ()
    title: str = ""

    def __post_init__(self):
        overlays = tuple(sorted(self.overlays, key=lambda f: (f.bic, f.param_count, f.spec.family.value)))
        if len(overlays) > len(CATALOG):
            raise DomainError(f"at most {len(CATALOG)} overlays")
        object.__setattr__(self, "overlays", overlays)


def overlay_curve(fit: FitResult, xs: np.ndarray) -> np.ndarray:
    spec = fit.spec
    if spec.family is DistributionFamily.POISSON:
        ys = distcat.pdf(spec, np.floor(xs))
    else:
        ys = distcat.pdf(spec, xs)
    return np.where(np.isfinite(ys), ys, 0.0)


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    return f"{v:.4g}"


def render_report(bundle: ReportBundle, width_px: int = 800, height_px: int = 500) -> bytes:
    """Render ``bundle`` as an SVG document (UTF-8 bytes)."""
    if width_px < 100 or height_px < 100:
        raise DomainError("figure must be at least 100x100 pixels")
    hist = bundle.histogram
    edges = np.asarray(hist.bin_edges, dtype=float)
    dens = np.asarray(hist.densities, dtype=float)
    if edges.size < 2 or not np.any(dens > 0):
        raise DomainError("histogram is empty")

    left, right, top, bottom = 70.0, 20.0, 40.0, 55.0
    plot_w = width_px - left - right
    plot_h = height_px - top - bottom
    x0, x1 = float(edges[0]), float(edges[-1])
    xs = np.linspace(x0, x1, CURVE_POINTS)
    curves = [overlay_curve(fit, xs) for fit in bundle.overlays]
    y_max = max([float(dens.max())] + [float(c.max()) for c in curves]) * 1.05

    def px(x):
        return left + (x - x0) / (x1 - x0) * plot_w

    def py(y):
        return top + plot_h - y / y_max * plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" height="{height_px}" '
        f'viewBox="0 0 {width_px} {height_px}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width_px}" height="{height_px}" fill="white"/>',
    ]
    if bundle.title:
        out.append(f'<text x="{_fmt(width_px / 2)}" y="22" text-anchor="middle" font-size="14">'
                   f'{escape(bundle.title)}</text>')

    out.append('<g class="bars">')
    for lo, hi, d in zip(edges[:-1], edges[1:], dens):
        y = py(d)
        out.append(f'<rect x="{_fmt(px(lo))}" y="{_fmt(y)}" width="{_fmt(px(hi) - px(lo))}" '
                   f'height="{_fmt(top + plot_h - y)}" fill="{BAR_COLOR}" stroke="#888888" stroke-width="0.5"/>')
    out.append("</g>")

    out.append('<g class="axes" stroke="black" stroke-width="1">')
    out.append(f'<line x1="{_fmt(left)}" y1="{_fmt(top + plot_h)}" x2="{_fmt(left + plot_w)}" y2="{_fmt(top + plot_h)}"/>')
    out.append(f'<line x1="{_fmt(left)}" y1="{_fmt(top)}" x2="{_fmt(left)}" y2="{_fmt(top + plot_h)}"/>')
    out.append("</g>")
    out.append('<g class="ticks" font-size="10">')
    for t in _nice_ticks(x0, x1):
        out.append(f'<text x="{_fmt(px(t))}" y="{_fmt(top + plot_h + 15)}" text-anchor="middle">{_label(t)}</text>')
    for t in _nice_ticks(0.0, y_max):
        out.append(f'<text x="{_fmt(left - 5)}" y="{_fmt(py(t) + 3)}" text-anchor="end">{_label(t)}</text>')
    out.append("</g>")
    out.append(f'<text class="xlabel" x="{_fmt(left + plot_w / 2)}" y="{_fmt(height_px - 12)}" '
               f'text-anchor="middle">Bandwidth (Kbps)</text>')
    out.append(f'<text class="ylabel" transform="translate(16,{_fmt(top + plot_h / 2)}) rotate(-90)" '
               f'text-anchor="middle">Probability density (1/Kbps)</text>')

    if bundle.overlays:
        out.append('<g class="overlays" fill="none" stroke-width="1.8">')
        for i, ys in enumerate(curves):
            pts = " ".join(f"{_fmt(px(x))},{_fmt(py(min(y, y_max)))}" for x, y in zip(xs, ys))
            out.append(f'<polyline stroke="{PALETTE[i % len(PALETTE)]}" points="{pts}"/>')
        out.append("</g>")
        out.append('<g class="legend">')
        for i, fit in enumerate(bundle.overlays):
            y = top + 14 + 16 * i
            lx = left + plot_w - 220
            color = PALETTE[i % len(PALETTE)]
            out.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(y - 4)}" x2="{_fmt(lx + 20)}" y2="{_fmt(y - 4)}" '
                       f'stroke="{color}" stroke-width="2"/>')
            out.append(f'<text class="legend-entry" x="{_fmt(lx + 26)}" y="{_fmt(y)}">'
                       f'{escape(fit.spec.family.value)} (BIC {fit.bic:.2f})</text>')
        out.append("</g>")
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


# matplotlib figures ---------------------------------------------------------

def _save(fig, path: str) -> None:
    fmt = str(path).rsplit(".", 1)[-1].lower()
    metadata = {
        "png": {"Software": None},
        "svg": {"Date": None, "Creator": None},
        "pdf": {"CreationDate": None, "Creator": None, "Producer": None},
    }.get(fmt)
    fig.savefig(path, metadata=metadata)


def _figure(figsize=(8, 5)):
    import matplotlib

    matplotlib.rcParams["svg.hashsalt"] = "muxstat"
    from matplotlib.figure import Figure

    return Figure(figsize=figsize, dpi=100, layout="tight")


def plot_report(bundle: ReportBundle, path: str) -> None:
    """Histogram plus fitted densities, legend in BIC order."""
    fig = _figure()
    ax = fig.add_subplot()
    hist = bundle.histogram
    ax.bar(hist.bin_edges[:-1], hist.densities, width=hist.widths, align="edge",
           color=BAR_COLOR, edgecolor="#888888", linewidth=0.5)
    xs = np.linspace(hist.bin_edges[0], hist.bin_edges[-1], CURVE_POINTS)
    for i, fit in enumerate(bundle.overlays):
        ax.plot(xs, overlay_curve(fit, xs), color=PALETTE[i % len(PALETTE)],
                label=f"{fit.spec.family.value} (BIC {fit.bic:.2f})")
    if bundle.overlays:
        ax.legend(loc="upper right")
    ax.set_xlabel("Bandwidth (Kbps)")
    ax.set_ylabel("Probability density (1/Kbps)")
    if bundle.title:
        ax.set_title(bundle.title)
    _save(fig, path)


def plot_series(series: Sequence[BitrateSeries], path: str, title: str = "") -> None:
    """Bandwidth against sample index, one line per channel."""
    fig = _figure(figsize=(10, 4))
    ax = fig.add_subplot()
    for i, s in enumerate(series):
        ax.plot(np.arange(len(s)), s.samples, linewidth=0.8, color=PALETTE[i % len(PALETTE)],
                label=s.channel_id)
    if 1 < len(series) <= 16:
        ax.legend(loc="upper right", fontsize=7, ncol=2)
    ax.set_xlabel("Sample")
    ax.set_ylabel("Bandwidth (Kbps)")
    if title:
        ax.set_title(title)
    _save(fig, path)
