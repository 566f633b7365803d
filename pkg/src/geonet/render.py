"""Deterministic SVG output for nets."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import quoteattr

from .errors import PreconditionError
from .netcore import PlanarNet


@dataclass(frozen=True)
class RenderStyle:
    width: int = 800
    height: int = 800
    stroke: float = 1.0  # width of a multiplicity-1 edge, in pixels
    stroke_per_mult: float = 0.75  # added per extra unit of multiplicity
    marker_radius: float = 4.0
    decimals: int = 3
    edge_color: str = "#1f3b73"
    boundary_color: str = "#b22222"
    background: str = "#ffffff"
    labels: bool = False


def render_svg(net: PlanarNet, style: RenderStyle | None = None) -> str:
    """SVG with one <line> per edge and circled boundary vertices; y axis points up."""
    style = style or RenderStyle()
    if not net.vertices:
        raise PreconditionError("cannot render an empty net")
    pts = {v.id: (float(v.position[0]), float(v.position[1])) for v in net.vertices}
    xs = [p[0] for p in pts.values()]
    ys = [p[1] for p in pts.values()]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0) or 1.0
    pad = 0.05 * span
    x0, y0 = x0 - pad, y0 - pad
    w = (x1 - x0) + pad or 1.0
    h = (y1 - y0) + pad or 1.0
    s = min(style.width / w, style.height / h)
    d = style.decimals

    def sx(x):
        return f"{(x - x0) * s:.{d}f}"

    def sy(y):
        return f"{(y0 + h - y) * s:.{d}f}"

    W, H = f"{w * s:.{d}f}", f"{h * s:.{d}f}"
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="100%" height="100%" fill="{style.background}"/>',
        f'<g stroke="{style.edge_color}" stroke-linecap="round">',
    ]
    for e in net.edges:
        (ax, ay), (bx, by) = pts[e.a], pts[e.b]
        sw = style.stroke + style.stroke_per_mult * (e.mult - 1)
        out.append(
            f'<line x1="{sx(ax)}" y1="{sy(ay)}" x2="{sx(bx)}" y2="{sy(by)}" stroke-width="{sw:.{d}f}"/>'
        )
    out.append("</g>")
    out.append(f'<g fill="none" stroke="{style.boundary_color}" stroke-width="1">')
    for v in net.vertices:
        if v.is_boundary:
            x, y = pts[v.id]
            out.append(f'<circle cx="{sx(x)}" cy="{sy(y)}" r="{style.marker_radius:.{d}f}"/>')
    out.append("</g>")
    if style.labels:
        out.append('<g font-size="9" font-family="monospace">')
        for v in net.vertices:
            x, y = pts[v.id]
            out.append(f"<text x={quoteattr(sx(x))} y={quoteattr(sy(y))}>{v.id}</text>")
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
