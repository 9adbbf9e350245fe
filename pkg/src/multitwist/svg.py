"""Deterministic SVG pictures of rectangle complexes and flow trajectories.

Layout: one row per horizontal cylinder (sorted by curve id), rectangles
side by side in traversal order, chart-rotated rectangles drawn rotated.
Gluing targets are annotated on the east and north sides; trajectories are
polyline overlays in layout coordinates.  Output bytes depend only on the
inputs, so snapshots diff cleanly.
"""

from __future__ import annotations

from .surfaces import RectangleComplex

_ROW_GAP = 0.6
_FMT = "{:.6f}"


def _f(x) -> str:
    return _FMT.format(float(x))


class _Layout:
    """Plane positions of every rectangle, one row per horizontal cylinder."""

    def __init__(self, m: RectangleComplex):
        self.m = m
        self.pos = {}  # edge -> (x0, y0, w, h, orient)
        y = 0.0
        self.rows = []
        for v in sorted(m.h_layouts):
            lay = m.h_layouts[v]
            h = float(lay.transverse)
            for e, o, off in zip(lay.edges, lay.orients, lay.offsets):
                self.pos[e] = (float(off), y, float(m.width[e]), h, o)
            self.rows.append((v, y, float(lay.length), h, lay.closed))
            y += h + _ROW_GAP
        self.total_h = y - _ROW_GAP if self.rows else 0.0
        self.total_w = max((r[2] for r in self.rows), default=0.0)

    def point(self, edge, x, y):
        x0, y0, w, h, o = self.pos[edge]
        if o == 1:
            return (x0 + float(x), y0 + float(y))
        return (x0 + w - float(x), y0 + h - float(y))


def surface_svg(m: RectangleComplex, trajectories=(), shade=None,
                scale: float = 60.0) -> str:
    """Render the complex; trajectories are flow Trajectory objects, shade an
    optional set of edges to fill (coverage pictures)."""
    lay = _Layout(m)
    shade = set(shade or ())
    pad = 0.5
    width = (lay.total_w + 2 * pad) * scale
    height = (lay.total_h + 2 * pad) * scale

    def sx(x):
        return _f((x + pad) * scale)

    def sy(y):
        # flip: mathematical y grows upward
        return _f((lay.total_h - y + pad) * scale)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" '
        f'height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}">',
        '<g font-family="monospace" font-size="10">',
    ]
    for e in sorted(lay.pos):
        x0, y0, w, h, o = lay.pos[e]
        fill = "#cfe8ff" if e in shade else "#ffffff"
        out.append(f'<rect x="{sx(x0)}" y="{sy(y0 + h)}" width="{_f(w * scale)}" '
                   f'height="{_f(h * scale)}" fill="{fill}" stroke="#333333" '
                   'stroke-width="1"/>')
        cx, cy = x0 + w / 2, y0 + h / 2
        rot = "" if o == 1 else " (rot)"
        out.append(f'<text x="{sx(cx)}" y="{sy(cy)}" text-anchor="middle">'
                   f'{e}{rot}</text>')
        # gluing annotations on the east and north sides
        for side, ax, ay in (("E", x0 + w, cy), ("N", cx, y0 + h)):
            if (e, side) in m.gluings:
                e2, s2, rev = m.gluings[(e, side)]
                label = f"{e2}{s2}{'~' if rev else ''}"
            elif (e, side) in m.frontier:
                label = "…"
            else:
                continue
            out.append(f'<text x="{sx(ax)}" y="{sy(ay)}" text-anchor="middle" '
                       f'fill="#888888" font-size="7">{label}</text>')
    palette = ("#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")
    for k, traj in enumerate(trajectories):
        color = palette[k % len(palette)]
        for seg in traj.segments:
            x1, y1 = lay.point(seg.edge, seg.x_in, seg.y_in)
            x2, y2 = lay.point(seg.edge, seg.x_out, seg.y_out)
            out.append(f'<line x1="{sx(x1)}" y1="{sy(y1)}" x2="{sx(x2)}" '
                       f'y2="{sy(y2)}" stroke="{color}" stroke-width="1.5"/>')
        if traj.segments:
            last = traj.segments[-1]
            x2, y2 = lay.point(last.edge, last.x_out, last.y_out)
            if traj.terminal == "window-exit":
                out.append(f'<circle cx="{sx(x2)}" cy="{sy(y2)}" r="4" '
                           f'fill="none" stroke="{color}" stroke-width="1.5" '
                           'stroke-dasharray="2,2"/>')
            elif traj.terminal == "singular":
                out.append(f'<circle cx="{sx(x2)}" cy="{sy(y2)}" r="3" '
                           f'fill="{color}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
