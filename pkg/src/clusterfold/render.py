"""Deterministic SVG and TikZ drawings.

Snake and orbit graphs carry drawing coordinates on their vertices, so
rendering is a direct projection: every edge becomes a segment, the minimal
matching is highlighted, edge labels sit at midpoints and tile diagonals at
tile centers.  Triangulations have no embedding, so they are drawn
schematically as their triangle-adjacency diagram: one node per triangle on a
circle, one labeled connection per shared arc.

Output is byte-identical across runs: all iteration is over sorted ids and
coordinates are formatted with a fixed precision.
"""

from __future__ import annotations

import math
from html import escape

from .errors import ValidationError
from .snake import SnakeGraph, minimal_matching
from .surface import Triangulation

_SCALE = 70.0
_MARGIN = 40.0


def _fmt(x) -> str:
    return f"{float(x):.2f}"


def render(obj, fmt: str = "svg", highlight=None) -> str:
    """Render a snake graph or a triangulation to an SVG or TikZ document."""
    fmt = fmt.lower()
    if fmt not in ("svg", "tikz"):
        raise ValidationError(f"unknown format {fmt!r}; expected svg or tikz")
    if isinstance(obj, SnakeGraph):
        return render_graph(obj, fmt, highlight)
    if isinstance(obj, Triangulation):
        return render_triangulation(obj, fmt)
    raise ValidationError(f"cannot render a {type(obj).__name__}")


# -- snake graphs -------------------------------------------------------------

def _graph_elements(graph, highlight):
    """Segments, labels and matched-edge set shared by both backends."""
    if highlight is None and graph.tiles:
        try:
            highlight = minimal_matching(graph)
        except ValidationError:
            highlight = frozenset()
    matched = frozenset(highlight or ())
    segments = []
    for eid in sorted(graph.edges):
        e = graph.edges[eid]
        u, v = graph.vertices[e.u], graph.vertices[e.v]
        mx, my = (float(u[0]) + float(v[0])) / 2, (float(u[1]) + float(v[1])) / 2
        dx, dy = float(v[0]) - float(u[0]), float(v[1]) - float(u[1])
        norm = math.hypot(dx, dy) or 1.0
        # labels sit a fixed offset to the left of the edge direction
        lx, ly = mx - dy / norm * 0.16, my + dx / norm * 0.16
        segments.append({
            "eid": eid,
            "a": (float(u[0]), float(u[1])),
            "b": (float(v[0]), float(v[1])),
            "label": e.display,
            "label_at": (lx, ly),
            "matched": eid in matched,
            "extra": e.kind == "extra",
        })
    centers = [(t.index, (float(t.center[0]), float(t.center[1])), t.diagonal_label)
               for t in graph.tiles]
    return segments, centers


def render_graph(graph, fmt: str = "svg", highlight=None) -> str:
    segments, centers = _graph_elements(graph, highlight)
    if fmt == "tikz":
        return _graph_tikz(segments, centers)
    return _graph_svg(graph, segments, centers)


def _graph_svg(graph, segments, centers) -> str:
    xs = [float(p[0]) for p in graph.vertices.values()]
    ys = [float(p[1]) for p in graph.vertices.values()]
    if not xs:
        return ('<svg xmlns="http://www.w3.org/2000/svg" width="80" height="80" '
                'viewBox="0 0 80 80"></svg>')
    minx, maxx, miny, maxy = min(xs), max(xs), min(ys), max(ys)
    width = (maxx - minx) * _SCALE + 2 * _MARGIN
    height = (maxy - miny) * _SCALE + 2 * _MARGIN

    def proj(p):
        return ((p[0] - minx) * _SCALE + _MARGIN,
                (maxy - p[1]) * _SCALE + _MARGIN)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
           f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">']
    out.append('<g font-family="Helvetica,sans-serif" font-size="13">')
    for seg in segments:
        (x1, y1), (x2, y2) = proj(seg["a"]), proj(seg["b"])
        color = "#d95f02" if seg["matched"] else "#444444"
        width_px = "4.0" if seg["matched"] else "1.4"
        dash = ' stroke-dasharray="6 4"' if seg["extra"] else ""
        if seg["extra"]:
            cx = (x1 + x2) / 2 + (y2 - y1) * 0.35
            cy = (y1 + y2) / 2 + (x1 - x2) * 0.35
            out.append(f'<path d="M {_fmt(x1)} {_fmt(y1)} Q {_fmt(cx)} {_fmt(cy)} '
                       f'{_fmt(x2)} {_fmt(y2)}" fill="none" stroke="{color}" '
                       f'stroke-width="{width_px}"{dash}/>')
        else:
            out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
                       f'y2="{_fmt(y2)}" stroke="{color}" stroke-width="{width_px}"{dash}/>')
    for vid in sorted(graph.vertices):
        x, y = proj((float(graph.vertices[vid][0]), float(graph.vertices[vid][1])))
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="#222222"/>')
    for seg in segments:
        lx, ly = proj(seg["label_at"])
        out.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" text-anchor="middle" '
                   f'fill="#1a6091">{escape(str(seg["label"]))}</text>')
    for _, (cx, cy), diag in centers:
        x, y = proj((cx, cy))
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="middle" '
                   f'font-style="italic" fill="#777777">{escape(str(diag))}</text>')
    out.append("</g></svg>")
    return "\n".join(out)


def _graph_tikz(segments, centers) -> str:
    out = ["\\begin{tikzpicture}[scale=1.6,"
           " plainedge/.style={draw=black!70, line width=0.6pt},"
           " matched/.style={draw=orange!90!black, line width=2.2pt}]"]
    for seg in segments:
        style = "matched" if seg["matched"] else "plainedge"
        opts = style + (", dashed" if seg["extra"] else "")
        (x1, y1), (x2, y2) = seg["a"], seg["b"]
        bend = " to[bend left=28]" if seg["extra"] else " --"
        out.append(f"  \\draw[{opts}] ({_fmt(x1)},{_fmt(y1)}){bend} ({_fmt(x2)},{_fmt(y2)});")
    for seg in segments:
        lx, ly = seg["label_at"]
        out.append(f"  \\node[font=\\scriptsize, text=blue!50!black] at "
                   f"({_fmt(lx)},{_fmt(ly)}) {{{seg['label']}}};")
    for _, (cx, cy), diag in centers:
        out.append(f"  \\node[font=\\scriptsize\\itshape, text=black!50] at "
                   f"({_fmt(cx)},{_fmt(cy)}) {{{diag}}};")
    out.append("\\end{tikzpicture}")
    return "\n".join(out)


# -- triangulations -----------------------------------------------------------

def render_triangulation(t: Triangulation, fmt: str = "svg") -> str:
    m = len(t.triangles)
    nodes = []
    for idx, tri in enumerate(t.triangles):
        ang = 2 * math.pi * idx / max(m, 1) - math.pi / 2
        r = 1.0 + 0.35 * m
        nodes.append(((r * math.cos(ang), r * math.sin(ang)),
                      f"{idx}: ({','.join(tri)})"))
    links = []
    for label in t.arc_labels:
        tris = t.triangles_of(label)
        if len(tris) == 2 and tris[0] != tris[1]:
            links.append((tris[0], tris[1], label))
    links.sort()
    if fmt == "tikz":
        out = ["\\begin{tikzpicture}[scale=0.9]"]
        for a, b, label in links:
            (x1, y1), (x2, y2) = nodes[a][0], nodes[b][0]
            out.append(f"  \\draw[black!60] ({_fmt(x1)},{_fmt(y1)}) -- "
                       f"({_fmt(x2)},{_fmt(y2)}) node[midway, font=\\scriptsize, "
                       f"fill=white] {{{label}}};")
        for (x, y), text in nodes:
            out.append(f"  \\node[draw, rounded corners, font=\\scriptsize, "
                       f"fill=white] at ({_fmt(x)},{_fmt(y)}) {{{text}}};")
        out.append("\\end{tikzpicture}")
        return "\n".join(out)

    size = 2 * (1.0 + 0.35 * m) * _SCALE + 2 * _MARGIN + 80

    def proj(p):
        return (p[0] * _SCALE + size / 2, size / 2 - p[1] * _SCALE)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(size)}" '
           f'height="{_fmt(size)}" viewBox="0 0 {_fmt(size)} {_fmt(size)}">']
    out.append('<g font-family="Helvetica,sans-serif" font-size="12">')
    for a, b, label in links:
        (x1, y1), (x2, y2) = proj(nodes[a][0]), proj(nodes[b][0])
        out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
                   f'y2="{_fmt(y2)}" stroke="#888888" stroke-width="1.2"/>')
        out.append(f'<text x="{_fmt((x1 + x2) / 2)}" y="{_fmt((y1 + y2) / 2 - 4)}" '
                   f'text-anchor="middle" fill="#1a6091">{escape(label)}</text>')
    for (x, y), text in [(proj(p), text) for p, text in nodes]:
        out.append(f'<rect x="{_fmt(x - 52)}" y="{_fmt(y - 12)}" width="104" height="22" '
                   f'rx="6" fill="#ffffff" stroke="#555555"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(y + 4)}" text-anchor="middle">'
                   f'{escape(text)}</text>')
    out.append("</g></svg>")
    return "\n".join(out)
