"""Rectilinear boundary polygons of two-dimensional grid tiles.

A finite set of grid cells has a boundary polygon whose vertices sit at
half-integer coordinates: each cell (x, y) contributes the unit square
centered on it.  To keep everything in integers, this module works in
doubled coordinates, where that square spans [2x-1, 2x+1] x [2y-1, 2y+1]
and all vertices are odd integer pairs.

Boundary edges are oriented with the filled region on the left, which makes
outer loops counterclockwise and hole loops clockwise, the standard even-odd
fill convention.  Where two boundary strands meet at a single vertex the
traced walk may produce a self-touching loop; such loops are split at the
repeated vertex until every loop is simple.
"""

from dataclasses import dataclass

from .errors import SpecError
from .groups import grid_coords, is_connected
from .tiling import Tile


@dataclass(frozen=True)
class LatticePolygon:
    """Boundary loops (doubled integer vertices), enclosed area, connectivity."""

    loops: tuple
    area: int
    connected: bool

    def outer_loops(self):
        return tuple(lp for lp in self.loops if loop_area_doubled(lp) > 0)

    def hole_loops(self):
        return tuple(lp for lp in self.loops if loop_area_doubled(lp) < 0)

    def to_json(self):
        return {
            "loops": [[[x / 2, y / 2] for x, y in lp] for lp in self.loops],
            "area": self.area,
            "connected": self.connected,
        }


def loop_area_doubled(loop):
    """Signed shoelace area of a loop in doubled coordinates, times two."""
    total = 0
    for i, (x0, y0) in enumerate(loop):
        x1, y1 = loop[(i + 1) % len(loop)]
        total += x0 * y1 - x1 * y0
    return total


def _boundary_edges(cells):
    """Directed boundary edges keyed by start vertex, filled side on the left."""
    edges = {}

    def add(a, b):
        edges.setdefault(a, []).append(b)

    for x, y in cells:
        cx, cy = 2 * x, 2 * y
        if (x, y - 1) not in cells:
            add((cx - 1, cy - 1), (cx + 1, cy - 1))
        if (x + 1, y) not in cells:
            add((cx + 1, cy - 1), (cx + 1, cy + 1))
        if (x, y + 1) not in cells:
            add((cx + 1, cy + 1), (cx - 1, cy + 1))
        if (x - 1, y) not in cells:
            add((cx - 1, cy + 1), (cx - 1, cy - 1))
    for outs in edges.values():
        outs.sort()
    return edges


def _trace_loops(edges):
    loops = []
    while edges:
        start = min(edges)
        prev = start
        cur = edges[start][0]
        _pop_edge(edges, start, cur)
        loop = [start]
        while cur != start:
            loop.append(cur)
            outs = edges[cur]
            if len(outs) == 1:
                nxt = outs[0]
            else:
                dx, dy = cur[0] - prev[0], cur[1] - prev[1]
                # prefer the sharpest left turn so strands bounce rather
                # than cross; merged loops are split afterwards anyway
                want = [(cur[0] - dy, cur[1] + dx), (cur[0] + dx, cur[1] + dy),
                        (cur[0] + dy, cur[1] - dx)]
                nxt = next(w for w in want if w in outs)
            _pop_edge(edges, cur, nxt)
            prev, cur = cur, nxt
        loops.append(loop)
    return loops


def _pop_edge(edges, a, b):
    outs = edges[a]
    outs.remove(b)
    if not outs:
        del edges[a]


def _split_simple(loop):
    """Split a loop at repeated vertices until every piece is simple."""
    seen = {}
    for i, v in enumerate(loop):
        if v in seen:
            j = seen[v]
            inner = loop[j:i]
            rest = loop[:j] + loop[i:]
            return _split_simple(inner) + _split_simple(rest)
        seen[v] = i
    return [loop]


def _merge_collinear(loop):
    out = []
    n = len(loop)
    for i, v in enumerate(loop):
        a = loop[i - 1]
        b = loop[(i + 1) % n]
        if (v[0] - a[0], v[1] - a[1]) != (b[0] - v[0], b[1] - v[1]):
            out.append(v)
    return tuple(out)


def _normalize_loop(loop):
    """Rotate so the smallest vertex comes first; keeps output canonical."""
    k = loop.index(min(loop))
    return loop[k:] + loop[:k]


def polygonize(spec, cells) -> LatticePolygon:
    """Boundary polygon of a set of cells in a two-dimensional grid.

    The enclosed area always equals the number of cells.  Disconnected
    input is legal and yields one outer loop per component, with the
    connectivity flag cleared.
    """
    if spec.model != "grid" or spec.dim != 2:
        raise SpecError("boundary polygons need a two-dimensional grid")
    elements = tuple(cells.cells) if isinstance(cells, Tile) else tuple(cells)
    if not elements:
        raise SpecError("cannot polygonize an empty set")
    pts = {grid_coords(spec, c) for c in elements}
    loops = []
    for raw in _trace_loops(_boundary_edges(pts)):
        for piece in _split_simple(raw):
            loops.append(_normalize_loop(_merge_collinear(piece)))
    loops.sort(key=lambda lp: (-loop_area_doubled(lp), lp))
    area8 = sum(loop_area_doubled(lp) for lp in loops)
    if area8 != 8 * len(pts):
        raise RuntimeError("internal error: traced area %s does not match "
                           "%d cells" % (area8 / 8, len(pts)))
    return LatticePolygon(loops=tuple(loops), area=len(pts),
                          connected=is_connected(spec, elements))
