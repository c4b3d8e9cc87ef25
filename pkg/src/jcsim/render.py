"""Figure rendering: phase-space contours and line/histogram reports.

Figures are produced without pyplot state and serialized to SVG with a
fixed hash salt and no creation date, so a given field and style always
yield the same bytes.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .wigner import WignerField

_SVG_RC = {"svg.hashsalt": "jcsim", "svg.fonttype": "path"}


@dataclass(frozen=True)
class ContourStyle:
    """Appearance of a phase-space contour plot."""

    n_levels: int = 41
    cmap: str = "RdBu_r"
    title: str = ""
    xlabel: str = "x"
    ylabel: str = "y"
    figsize: tuple = (5.4, 4.6)


def _svg_bytes(fig: Figure) -> bytes:
    buf = io.BytesIO()
    with matplotlib.rc_context(_SVG_RC):
        FigureCanvasSVG(fig).print_svg(buf, metadata={"Date": None})
    return buf.getvalue()


def render_contour(field: WignerField, style: ContourStyle = ContourStyle()
                   ) -> bytes:
    """Filled contour plot of a Wigner field as an SVG document.

    The color scale is a diverging map centered at zero and the zero level
    is drawn explicitly as a dashed contour, marking any region of
    negative quasi-probability.
    """
    values = field.values
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite values")
    vmax = float(np.max(np.abs(values)))
    if vmax == 0.0:
        vmax = 1e-12
    # an even number of intervals keeps zero on a level boundary
    nlev = style.n_levels + (style.n_levels % 2 == 0)
    levels = np.linspace(-vmax, vmax, nlev)

    fig = Figure(figsize=style.figsize)
    ax = fig.add_subplot(111)
    x, y = field.grid.x_values, field.grid.y_values
    cf = ax.contourf(x, y, values.T, levels=levels, cmap=style.cmap)
    ax.contour(x, y, values.T, levels=[0.0], colors="k",
               linestyles="dashed", linewidths=1.0)
    ax.set_xlabel(style.xlabel)
    ax.set_ylabel(style.ylabel)
    if style.title:
        ax.set_title(style.title)
    ax.set_aspect("equal")
    fig.colorbar(cf, ax=ax)
    fig.tight_layout()
    return _svg_bytes(fig)


def render_lines(x, series: dict, xlabel: str, ylabel: str, title: str = "",
                 logy: bool = False) -> bytes:
    """Simple multi-line SVG figure; `series` maps label -> y array."""
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot(111)
    for label, y in series.items():
        ax.plot(x, y, lw=1.0, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    return _svg_bytes(fig)


def render_histogram(bin_edges, counts, mean: float, xlabel: str,
                     title: str = "") -> bytes:
    """Histogram bar figure with the sample mean marked."""
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot(111)
    widths = np.diff(bin_edges)
    ax.bar(bin_edges[:-1], counts, width=widths, align="edge",
           color="#6699cc", edgecolor="none")
    ax.axvline(mean, color="k", lw=1.2, ls="--", label=f"mean = {mean:.3f}")
    ax.axvline(1.0, color="0.5", lw=0.8, ls=":")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("counts")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    return _svg_bytes(fig)
