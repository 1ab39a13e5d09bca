"""Standalone SVG drawings of a layout."""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


@dataclass(frozen=True)
class RenderOptions:
    size: float = 600.0
    margin: float = 0.05  # fraction of the viewport on each side
    node_radius: float = 4.0
    node_color: str = "#333333"
    edge_color: str = "#888888"
    edge_width: float = 1.0
    labels: bool = False
    ids: tuple = ()


def viewport_transform(X, size, margin):
    """Affine map of ``X`` into ``[m, size - m]^2`` keeping the aspect ratio (y up)."""
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    if len(X) == 0:
        return X.copy()
    lo = X.min(axis=0)
    span = float(np.max(X.max(axis=0) - lo))
    inner = size * (1.0 - 2.0 * margin)
    s = inner / span if span > 0 else 0.0
    off = size * margin + 0.5 * (inner - s * (X.max(axis=0) - lo))
    P = (X - lo) * s + off
    P[:, 1] = size - P[:, 1]
    return P


def _color(group, table):
    if group is None:
        return None
    if group not in table:
        table[group] = PALETTE[len(table) % len(PALETTE)]
    return table[group]


def render_svg(layout, g, options: RenderOptions = RenderOptions()):
    """Edges as straight lines, nodes as circles coloured by group."""
    o = options
    P = viewport_transform(layout, o.size, o.margin)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{o.size:g}" height="{o.size:g}" '
           f'viewBox="0 0 {o.size:g} {o.size:g}">',
           f'<rect width="{o.size:g}" height="{o.size:g}" fill="white"/>']
    for i, j in g.edges:
        out.append(f'<line x1="{P[i, 0]:.3f}" y1="{P[i, 1]:.3f}" x2="{P[j, 0]:.3f}" y2="{P[j, 1]:.3f}" '
                   f'stroke="{o.edge_color}" stroke-width="{o.edge_width:g}"/>')
    colors = {}
    groups = g.groups or (None,) * g.node_count
    for k in range(g.node_count):
        c = _color(groups[k], colors) or o.node_color
        out.append(f'<circle cx="{P[k, 0]:.3f}" cy="{P[k, 1]:.3f}" r="{o.node_radius:g}" fill="{c}"/>')
    if o.labels:
        ids = o.ids or tuple(str(k) for k in range(g.node_count))
        for k in range(g.node_count):
            out.append(f'<text x="{P[k, 0] + o.node_radius + 1:.3f}" y="{P[k, 1] - o.node_radius - 1:.3f}" '
                       f'font-size="10" font-family="sans-serif">{escape(str(ids[k]))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
