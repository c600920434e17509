"""Deterministic SVG rendering of grid tiles, layer diagrams and polygons.

All geometry is produced in integer pixel coordinates (the default scale is
even, so half-integer lattice coordinates land on integers), output order is
fully sorted, and no timestamps or random ids are emitted, so rendering the
same scene twice yields byte-identical documents.  Only two-dimensional grid
scenes can be drawn; word-model results stay textual.
"""

from dataclasses import dataclass

from .errors import SpecError
from .groups import grid_coords, grid_element, mul
from .heesch import HeeschCertificate
from .polygons import LatticePolygon, polygonize
from .tiling import Tile

PALETTE = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
           "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")


@dataclass(frozen=True)
class RenderStyle:
    scale: int = 24
    margin: int = 1
    palette: tuple = PALETTE
    center_fill: str = "#ffd54a"
    stroke: str = "#1c1c1c"
    stroke_width: int = 2
    background: str = "#ffffff"


def _px(style, doubled):
    return doubled * style.scale // 2


def _path_d(style, loops):
    parts = []
    for loop in loops:
        first = True
        for x, y in loop:
            cmd = "M" if first else "L"
            first = False
            parts.append("%s%d %d" % (cmd, _px(style, x), _px(style, -y)))
        parts.append("Z")
    return "".join(parts)


def _path(style, loops, fill):
    return ('<path d="%s" fill="%s" fill-rule="evenodd" stroke="%s" '
            'stroke-width="%d" stroke-linejoin="miter"/>'
            % (_path_d(style, loops), fill, style.stroke, style.stroke_width))


def _document(style, paths, bounds):
    xmin, ymin, xmax, ymax = bounds
    pad = 2 * style.margin
    x0 = _px(style, xmin - pad)
    y0 = _px(style, -(ymax + pad))
    w = _px(style, (xmax - xmin) + 2 * pad)
    h = _px(style, (ymax - ymin) + 2 * pad)
    head = ('<svg xmlns="http://www.w3.org/2000/svg" '
            'viewBox="%d %d %d %d" width="%d" height="%d">'
            % (x0, y0, w, h, w, h))
    bg = ('<rect x="%d" y="%d" width="%d" height="%d" fill="%s"/>'
          % (x0, y0, w, h, style.background))
    return head + bg + "".join(paths) + "</svg>"


def _bounds_of_loops(loop_groups):
    xs = [x for loops in loop_groups for lp in loops for x, _ in lp]
    ys = [y for loops in loop_groups for lp in loops for _, y in lp]
    return min(xs), min(ys), max(xs), max(ys)


def render_polygon_svg(polygon: LatticePolygon, style=None) -> str:
    style = style or RenderStyle()
    fill = style.palette[0]
    return _document(style, [_path(style, polygon.loops, fill)],
                     _bounds_of_loops([polygon.loops]))


def render_tile_svg(spec, tile, style=None) -> str:
    style = style or RenderStyle()
    polygon = polygonize(spec, tile)
    return render_polygon_svg(polygon, style)


def _layer_scene(spec, cert):
    """(layer index, placement cells) pairs for a layer certificate."""
    cells = list(cert.cells)
    scenes = []
    for idx, layer in enumerate(cert.layers):
        for center in layer:
            scenes.append((idx, [mul(spec, center, f) for f in cells]))
    return scenes


def _periodic_scene(spec, cert):
    """The witness block of placements, repeated once in every direction."""
    w = cert.witness
    cells = list(cert.cells)
    scenes = []
    shifts = [(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)]
    for center in w.centers:
        base = grid_coords(spec, center)
        for shift in shifts:
            off = list(base)
            for s, period in zip(shift, w.periods):
                for d, comp in enumerate(period):
                    off[d] += s * comp
            pts = [tuple(o + fc for o, fc in zip(off, grid_coords(spec, f)))
                   for f in cells]
            idx = 0 if all(s == 0 for s in shift) and base == tuple(
                0 for _ in base) else 1
            scenes.append((idx, pts))
    return scenes


def render_certificate_svg(cert: HeeschCertificate, style=None) -> str:
    style = style or RenderStyle()
    spec = cert.group
    if spec.model != "grid" or spec.dim != 2:
        raise SpecError("only two-dimensional grid certificates render "
                        "to SVG")
    if cert.verdict.get("kind") == "tiles_periodic":
        scenes = [(idx, [grid_element(spec, p) for p in pts])
                  for idx, pts in _periodic_scene(spec, cert)]
    else:
        scenes = _layer_scene(spec, cert)
    paths = []
    groups = []
    for idx, pts in scenes:
        polygon = polygonize(spec, pts)
        fill = style.center_fill if idx == 0 else \
            style.palette[idx % len(style.palette)]
        paths.append(_path(style, polygon.loops, fill))
        groups.append(polygon.loops)
    return _document(style, paths, _bounds_of_loops(groups))


def render_svg(scene, style=None, spec=None) -> str:
    """Render a polygon, a tile or element set, or a certificate.

    Tiles and raw element sets need the group passed as `spec`; polygons
    and certificates are self-contained.
    """
    if isinstance(scene, LatticePolygon):
        return render_polygon_svg(scene, style)
    if isinstance(scene, HeeschCertificate):
        return render_certificate_svg(scene, style)
    if spec is None:
        raise SpecError("rendering a tile needs its group")
    if isinstance(scene, Tile):
        return render_tile_svg(spec, scene, style)
    return render_tile_svg(spec, tuple(scene), style)
