"""Deterministic SVG rendering of grids, planned paths and altitude profiles.

Output is built as plain text with fixed number formatting, so identical
inputs always give byte-identical files.
"""

from __future__ import annotations

from scoutpath.grid import OccupancyGrid2D

MAP_PIXELS = 600
STRIP_HEIGHT = 160
MARGIN = 10


def _f(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _gray(v: float) -> str:
    level = round(255 * (1.0 - v))
    return f"#{level:02x}{level:02x}{level:02x}"


def render_svg(grid2: OccupancyGrid2D, *, inflated: OccupancyGrid2D | None = None,
               waypoints=None, heights=None, start=None, target=None,
               intermediates=(), z_max: float | None = None) -> str:
    """SVG document of the grid with optional overlays.

    Cells are gray levels from white (free) to black (occupied). Cells that
    only ``inflated`` marks as occupied get an orange overlay. ``waypoints``
    becomes the polyline ``#path``; ``heights`` adds an altitude-versus-index
    strip chart (polyline ``#altitude``) under the map.
    """
    nx, ny = grid2.size
    cell = max(1.0, MAP_PIXELS / max(nx, ny))
    map_w, map_h = nx * cell, ny * cell
    x0, y0 = grid2.origin
    res = grid2.resolution

    def sx(x: float) -> float:
        return MARGIN + (x - x0) / res * cell

    def sy(y: float) -> float:
        return MARGIN + map_h - (y - y0) / res * cell

    strip = heights is not None and len(heights) > 0
    width = map_w + 2 * MARGIN
    height = map_h + 2 * MARGIN + (STRIP_HEIGHT + MARGIN if strip else 0)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
        '<g id="cells" shape-rendering="crispEdges">',
    ]
    values = grid2.values
    for j in range(ny):
        for i in range(nx):
            out.append(f'<rect class="cell" x="{_f(MARGIN + i * cell)}" y="{_f(MARGIN + map_h - (j + 1) * cell)}" '
                       f'width="{_f(cell)}" height="{_f(cell)}" fill="{_gray(float(values[i, j]))}"/>')
    out.append("</g>")

    if inflated is not None:
        grown = (inflated.values >= 1.0) & (values < 1.0)
        out.append('<g id="inflation" shape-rendering="crispEdges" fill="#ff8c00" fill-opacity="0.45">')
        for j in range(ny):
            for i in range(nx):
                if grown[i, j]:
                    out.append(f'<rect class="inflated" x="{_f(MARGIN + i * cell)}" '
                               f'y="{_f(MARGIN + map_h - (j + 1) * cell)}" width="{_f(cell)}" height="{_f(cell)}"/>')
        out.append("</g>")

    out.append(f'<rect id="frame" x="{_f(MARGIN)}" y="{_f(MARGIN)}" width="{_f(map_w)}" height="{_f(map_h)}" '
               'fill="none" stroke="#444444" stroke-width="1"/>')

    marker_r = max(3.0, 0.6 * cell)
    if waypoints:
        pts = " ".join(f"{_f(sx(p[0]))},{_f(sy(p[1]))}" for p in waypoints)
        out.append(f'<polyline id="path" points="{pts}" fill="none" stroke="#1f77b4" '
                   f'stroke-width="{_f(max(1.0, 0.3 * cell))}" stroke-linejoin="round"/>')
    for k, p in enumerate(intermediates):
        out.append(f'<circle class="intermediate" id="intermediate-{k}" cx="{_f(sx(p[0]))}" cy="{_f(sy(p[1]))}" '
                   f'r="{_f(0.7 * marker_r)}" fill="#17becf" stroke="#000000" stroke-width="0.5"/>')
    if start is not None:
        out.append(f'<circle id="start" cx="{_f(sx(start[0]))}" cy="{_f(sy(start[1]))}" r="{_f(marker_r)}" '
                   'fill="#d62728" stroke="#000000" stroke-width="0.5"/>')
    if target is not None:
        out.append(f'<circle id="target" cx="{_f(sx(target[0]))}" cy="{_f(sy(target[1]))}" r="{_f(marker_r)}" '
                   'fill="#e377c2" stroke="#000000" stroke-width="0.5"/>')

    if strip:
        top = 2 * MARGIN + map_h
        top_z = z_max if z_max else max(max(heights), 1.0)
        n = len(heights)
        span = max(n - 1, 1)
        out.append(f'<g id="altitude-strip"><rect x="{_f(MARGIN)}" y="{_f(top)}" width="{_f(map_w)}" '
                   f'height="{STRIP_HEIGHT}" fill="none" stroke="#444444" stroke-width="1"/>')
        pts = " ".join(f"{_f(MARGIN + map_w * t / span)},{_f(top + STRIP_HEIGHT * (1.0 - z / top_z))}"
                       for t, z in enumerate(heights))
        out.append(f'<polyline id="altitude" points="{pts}" fill="none" stroke="#2ca02c" stroke-width="1.5"/>')
        out.append(f'<text x="{_f(MARGIN + 4)}" y="{_f(top + 14)}" font-family="monospace" font-size="11" '
                   f'fill="#444444">altitude [m] vs waypoint index, top = {_f(top_z)} m</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
