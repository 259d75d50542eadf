"""Deterministic SVG rendering of planar diagrams.

One closed path per nonempty cell, clipped to the viewport; cells can be
filled uniformly or by height quantile (a fixed light-to-dark palette), which
makes the visual differences between the model families easy to see.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .laguerre import LaguerreDiagram

__all__ = ["RenderStyle", "render_svg"]

# light-to-dark blues; quantile index picks a bucket
_PALETTE = ["#deebf7", "#c6dbef", "#9ecae1", "#6baed6", "#4292c6", "#2171b5", "#084594"]


@dataclass(frozen=True)
class RenderStyle:
    stroke_width: float = 0.02
    viewport: float = 10.0  # half-width of the square viewport
    color_mode: str = "uniform"  # "uniform" | "by-height"
    clip_radius: float | None = None
    size_px: int = 640

    def __post_init__(self):
        if self.color_mode not in ("uniform", "by-height"):
            raise ValueError(f"unknown color mode {self.color_mode!r}")
        if self.viewport <= 0:
            raise ValueError("viewport must be positive")


def _fmt(x: float) -> str:
    return f"{x:.6f}".rstrip("0").rstrip(".")


def render_svg(diag: LaguerreDiagram, style: RenderStyle | None = None) -> str:
    """SVG 1.1 document for a 2D diagram; byte-identical for identical input."""
    if diag.dim != 2:
        raise ValueError(f"SVG rendering requires a 2D diagram, got dim={diag.dim}")
    style = style or RenderStyle()
    v = style.viewport
    s = style.size_px / (2.0 * v)

    def to_px(x, y):
        return (x + v) * s, (v - y) * s

    heights = [diag.heights[c.nucleus_index] for c in diag.nonempty_cells]
    if style.color_mode == "by-height" and heights:
        qs = np.quantile(np.asarray(heights), np.linspace(0, 1, len(_PALETTE) + 1)[1:-1])
    else:
        qs = None

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{style.size_px}" height="{style.size_px}" '
        f'viewBox="0 0 {style.size_px} {style.size_px}">',
        "<defs><clipPath id=\"vp\">",
    ]
    if style.clip_radius is not None:
        cx, cy = to_px(0.0, 0.0)
        lines.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(style.clip_radius * s)}"/>')
    else:
        lines.append(f'<rect x="0" y="0" width="{style.size_px}" height="{style.size_px}"/>')
    lines.append("</clipPath></defs>")
    lines.append('<g clip-path="url(#vp)">')

    for cell in diag.nonempty_cells:
        pts = [to_px(x, y) for x, y in cell.vertices]
        path = "M " + " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in pts) + " Z"
        if qs is not None:
            h = diag.heights[cell.nucleus_index]
            bucket = int(np.searchsorted(qs, h))
            fill = _PALETTE[bucket]
        else:
            fill = "#ffffff"
        lines.append(
            f'<path d="{path}" fill="{fill}" stroke="#000000" '
            f'stroke-width="{_fmt(style.stroke_width * s)}"/>'
        )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
