"""Layer decomposition and Heesch-number search with re-checkable certificates.

A partial tiling surrounds its center tile in layers: layer 0 is the tile
itself, and layer n is the unique minimal set of centers whose placements
cover every point at graph distance 1 from the union of the previous layers.
The search engine decides "at least N layers are achievable" by exhaustive
backtracking over placements confined to a computed containment radius, so a
failed search is a complete refutation, not a timeout.  Certificates carry
the tile, the witness centers and their layer decomposition, which is enough
to re-check every verdict without repeating the search.
"""

import json
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .errors import ResourceCapError, SpecError
from .groups import (
    GroupSpec,
    IDENTITY,
    element,
    grid_coords,
    grid_element,
    inverse,
    mul,
    neighbors,
    shortlex_key,
    sorted_elements,
    spec_digest,
)
from .tiling import (
    PartialTiling,
    PeriodicWitness,
    Tile,
    make_tile,
    placement,
    verify_periodic,
)

DEFAULT_MAX_NODES = 2_000_000
DEFAULT_PERIOD_BOUND = 8
CERTIFICATE_FORMAT = "heesch-certificate/1"


def _as_tile(spec, tile):
    if isinstance(tile, Tile):
        return tile
    return make_tile(spec, tile)


# -- layer decomposition ------------------------------------------------------------


@dataclass(frozen=True)
class LayerDecomposition:
    """Center sets per layer; layers[0] is always the identity singleton."""

    layers: tuple

    def depth(self):
        """Number of complete layers surrounding the center tile."""
        return len(self.layers) - 1

    def to_json(self):
        return [[str(c) for c in layer] for layer in self.layers]


def frontier(spec, covered):
    """All points outside `covered` adjacent to some point of it."""
    cells = set(covered)
    if not cells:
        raise SpecError("frontier of an empty set is undefined")
    out = set()
    for c in cells:
        for nb in neighbors(spec, c):
            if nb not in cells:
                out.add(nb)
    return frozenset(out)


def decompose_layers(spec, tiling: PartialTiling) -> LayerDecomposition:
    """Extract the unique maximal layer decomposition of a partial tiling.

    Placements are pairwise disjoint, so every point is covered by at most
    one placement and layer membership is forced: layer n is exactly the set
    of centers owning a frontier point of the previous layers' region.  The
    decomposition ends just before the first frontier point nobody covers.
    """
    owner = {}
    for c in tiling.centers:
        for cell in placement(spec, c, tiling.tile):
            owner[cell] = c
    layers = [(IDENTITY,)]
    region = set(placement(spec, IDENTITY, tiling.tile))
    while True:
        edge = set()
        for cell in region:
            for nb in neighbors(spec, cell):
                if nb not in region:
                    edge.add(nb)
        owners = set()
        complete = True
        for x in edge:
            c = owner.get(x)
            if c is None:
                complete = False
                break
            owners.add(c)
        if not complete or not owners:
            break
        layers.append(tuple(sorted_elements(spec, owners)))
        for c in owners:
            region |= placement(spec, c, tiling.tile)
    return LayerDecomposition(layers=tuple(layers))


def containment_radius(spec, tile, n) -> int:
    """Radius confining every placement of any configuration with n layers.

    Each successive layer reaches at most diam+1 further out than the last,
    so (n+1)*(diam+1) plus the length of the farthest tile cell bounds every
    cell of every placement that can participate in layers 0..n.
    """
    tile = _as_tile(spec, tile)
    cells = list(tile.cells)
    maxlen = max(len(c.word) for c in cells)
    diam = 0
    for x in cells:
        xi = inverse(spec, x)
        for y in cells:
            d = len(mul(spec, xi, y).word)
            if d > diam:
                diam = d
    return (n + 1) * (diam + 1) + maxlen


# -- search engine ------------------------------------------------------------------


class _Cancelled(Exception):
    pass


def _point_ops(spec, tile_cells):
    """Point-level helpers; two-dimensional grids run on raw coordinate pairs."""
    if spec.model == "grid" and spec.dim == 2:
        pts = [grid_coords(spec, c) for c in tile_cells]

        def to_pt(e):
            return grid_coords(spec, e)

        def from_pt(p):
            return grid_element(spec, p)

        def nbrs(p):
            x, y = p
            return ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1))

        def key(p):
            # shortlex key of the canonical word, in closed form: the word is
            # a run of x-steps then a run of y-steps, so compare (length,
            # first rank, run length of the first rank, second rank)
            x, y = p
            ax, ay = abs(x), abs(y)
            if x:
                first = 0 if x > 0 else 1
                run = ax
                second = (2 if y > 0 else 3) if y else first
            else:
                first = (2 if y > 0 else 3) if y else 0
                run = ay
                second = first
            return (ax + ay, first, -run, second)

        def place(c):
            cx, cy = c
            return [(cx + fx, cy + fy) for fx, fy in pts]

        def center_for(x, f):
            return (x[0] - f[0], x[1] - f[1])

        def plen(p):
            return abs(p[0]) + abs(p[1])

        return pts, to_pt, from_pt, nbrs, key, place, center_for, plen

    pts = list(tile_cells)
    inv = {f: inverse(spec, f) for f in pts}

    def to_pt(e):
        return e

    def from_pt(p):
        return p

    def nbrs(p):
        return neighbors(spec, p)

    def key(p):
        return shortlex_key(spec, p)

    def place(c):
        return [mul(spec, c, f) for f in pts]

    def center_for(x, f):
        return mul(spec, x, inv[f])

    def plen(p):
        return len(p.word)

    return pts, to_pt, from_pt, nbrs, key, place, center_for, plen


class _Search:
    """Exhaustive layer-by-layer placement search inside a fixed radius."""

    def __init__(self, spec, tile, n, radius, max_nodes):
        (self.pts, self.to_pt, self.from_pt, self.nbrs, self.key,
         self.place, self.center_for, self.plen) = _point_ops(spec, tile.cells)
        self.n = n
        self.radius = radius
        self.max_nodes = max_nodes
        self.nodes = 0
        self.stop = None

    def _frontier(self, covered):
        out = set()
        for cell in covered:
            for nb in self.nbrs(cell):
                if nb not in covered:
                    out.add(nb)
        return out

    def _placement_ok(self, cells, covered):
        r = self.radius
        for q in cells:
            if self.plen(q) > r or q in covered:
                return False
        return True

    def _candidates(self, x, covered):
        found = []
        for f in self.pts:
            c = self.center_for(x, f)
            cells = self.place(c)
            if self._placement_ok(cells, covered):
                found.append((c, cells))
        found.sort(key=lambda cc: self.key(cc[0]))
        return found

    def _required(self, covered):
        """Next layer's frontier, or None when some point is uncoverable."""
        pts = sorted(self._frontier(covered), key=self.key)
        for x in pts:
            for f in self.pts:
                if self._placement_ok(self.place(self.center_for(x, f)), covered):
                    break
            else:
                return None
        return pts

    def _extend(self, covered, centers, required, layer):
        if self.stop is not None and self.stop.is_set():
            raise _Cancelled()
        x = None
        for p in required:
            if p not in covered:
                x = p
                break
        if x is None:
            if layer >= self.n:
                return list(centers)
            nxt = self._required(covered)
            if nxt is None:
                return None
            return self._extend(covered, centers, nxt, layer + 1)
        for c, cells in self._candidates(x, covered):
            self.nodes += 1
            if self.nodes > self.max_nodes:
                raise ResourceCapError(
                    "layer search exceeded %d nodes" % self.max_nodes)
            covered.update(cells)
            centers.append(c)
            got = self._extend(covered, centers, required, layer)
            if got is not None:
                return got
            centers.pop()
            covered.difference_update(cells)
        return None

    def _initial(self):
        covered = set(self.place(self.to_pt(IDENTITY)))
        required = self._required(covered)
        return covered, required

    def run(self):
        covered, required = self._initial()
        if required is None:
            return None
        return self._extend(covered, [self.to_pt(IDENTITY)], required, 1)

    def run_parallel(self, threads):
        covered0, required = self._initial()
        if required is None:
            return None
        x = required[0]
        roots = self._candidates(x, covered0)
        if not roots:
            return None
        self.stop = threading.Event()
        results = []
        lock = threading.Lock()

        def work(root):
            c, cells = root
            covered = set(covered0)
            covered.update(cells)
            try:
                got = self._extend(covered, [self.to_pt(IDENTITY), c],
                                   required, 1)
            except _Cancelled:
                return
            if got is not None:
                with lock:
                    if not results:
                        results.append(got)
                        self.stop.set()

        with ThreadPoolExecutor(max_workers=min(threads, len(roots))) as pool:
            list(pool.map(work, roots))
        self.stop = None
        return results[0] if results else None


# -- results and certificates -------------------------------------------------------


@dataclass(frozen=True)
class Exhausted:
    """Failed search: no configuration with `target` layers inside `radius`."""

    target: int
    radius: int
    conclusive: bool
    containment_radius: int
    stats: dict

    def to_json(self):
        return {"kind": "exhausted", "target": self.target,
                "radius": self.radius, "conclusive": self.conclusive,
                "containment_radius": self.containment_radius,
                "stats": self.stats}


@dataclass(frozen=True)
class HeeschCertificate:
    """Re-checkable record of a layer-search or periodic-tiling verdict."""

    group: GroupSpec
    cells: tuple
    connected: bool
    verdict: dict
    witness: object
    centers: tuple
    layers: tuple
    radius: int
    containment_radius: int
    stats: dict


def certificate_to_json(cert: HeeschCertificate):
    doc = {
        "format": CERTIFICATE_FORMAT,
        "group": cert.group.to_json(),
        "group_digest": spec_digest(cert.group),
        "tile": [str(c) for c in cert.cells],
        "connected": cert.connected,
        "verdict": cert.verdict,
        "radius": cert.radius,
        "containment_radius": cert.containment_radius,
        "stats": cert.stats,
    }
    if cert.witness is not None:
        doc["witness"] = cert.witness.to_json()
    else:
        doc["centers"] = [str(c) for c in cert.centers]
        doc["layers"] = [[str(c) for c in layer] for layer in cert.layers]
    return doc


def certificate_from_json(doc) -> HeeschCertificate:
    if not isinstance(doc, dict) or doc.get("format") != CERTIFICATE_FORMAT:
        raise SpecError("not a recognized certificate document")
    needed = {"group", "group_digest", "tile", "connected", "verdict",
              "radius", "containment_radius", "stats"}
    missing = needed - set(doc)
    if missing:
        raise SpecError("certificate misses fields: %s" % sorted(missing))
    spec = GroupSpec.from_json(doc["group"])
    if doc["group_digest"] != spec_digest(spec):
        raise SpecError("certificate digest does not match its group")
    cells = tuple(element(spec, s) for s in doc["tile"])
    verdict = doc["verdict"]
    if not isinstance(verdict, dict) or "kind" not in verdict:
        raise SpecError("certificate verdict must carry a kind")
    witness = None
    centers = ()
    layers = ()
    if verdict["kind"] == "tiles_periodic":
        if "witness" not in doc:
            raise SpecError("periodic certificate misses its witness")
        witness = PeriodicWitness.from_json(spec, doc["witness"])
    else:
        if "centers" not in doc or "layers" not in doc:
            raise SpecError("layer certificate misses centers or layers")
        centers = tuple(element(spec, s) for s in doc["centers"])
        layers = tuple(tuple(element(spec, s) for s in layer)
                       for layer in doc["layers"])
    return HeeschCertificate(
        group=spec, cells=cells, connected=bool(doc["connected"]),
        verdict=verdict, witness=witness, centers=centers, layers=layers,
        radius=doc["radius"], containment_radius=doc["containment_radius"],
        stats=doc["stats"])


def certificate_bytes(cert: HeeschCertificate) -> bytes:
    """Canonical serialization; equal certificates give equal bytes."""
    return json.dumps(certificate_to_json(cert), sort_keys=True,
                      separators=(",", ":")).encode("ascii")


def _trivial_certificate(spec, tile):
    r0 = containment_radius(spec, tile, 0)
    return HeeschCertificate(
        group=spec, cells=tuple(sorted_elements(spec, tile.cells)),
        connected=tile.connected, verdict={"kind": "at_least", "n": 0},
        witness=None, centers=(IDENTITY,), layers=((IDENTITY,),),
        radius=r0, containment_radius=r0, stats={"nodes": 0})


def heesch_ge(spec, tile, n, radius_cap=None, deterministic=True, threads=1,
              max_nodes=DEFAULT_MAX_NODES):
    """Decide whether n complete layers around the tile are achievable.

    Returns a certificate on success.  On failure returns Exhausted, which
    is a complete refutation exactly when the searched radius reached the
    containment radius (always the case unless radius_cap lowered it).
    """
    tile = _as_tile(spec, tile)
    if n < 1:
        raise SpecError("layer target must be at least 1")
    r0 = containment_radius(spec, tile, n)
    radius = r0 if radius_cap is None else min(radius_cap, r0)
    limit = sys.getrecursionlimit()
    need = 20000
    if limit < need:
        sys.setrecursionlimit(need)
    search = _Search(spec, tile, n, radius, max_nodes)
    if deterministic or threads <= 1:
        got = search.run()
    else:
        got = search.run_parallel(threads)
    stats = {"nodes": search.nodes}
    if got is None:
        return Exhausted(target=n, radius=radius, conclusive=radius >= r0,
                         containment_radius=r0, stats=stats)
    centers = tuple(search.from_pt(p) for p in got)
    tiling = PartialTiling(spec, tile, centers)
    decomp = decompose_layers(spec, tiling)
    if decomp.depth() < n:
        raise RuntimeError("internal error: found configuration decomposes "
                           "into fewer layers than searched")
    return HeeschCertificate(
        group=spec, cells=tuple(sorted_elements(spec, tile.cells)),
        connected=tile.connected, verdict={"kind": "at_least", "n": n},
        witness=None, centers=tuple(sorted_elements(spec, centers)),
        layers=decomp.layers, radius=r0, containment_radius=r0,
        stats=stats)


def heesch_eval(spec, tile, max_layers=3, radius_cap=None,
                period_bound=DEFAULT_PERIOD_BOUND, deterministic=True,
                threads=1, max_nodes=DEFAULT_MAX_NODES):
    """Evaluate the layer count: periodic tiling, exact value, or lower bound.

    Grid tiles are first checked for a small-period periodic tiling, which
    settles the question positively for every layer count.  Otherwise layer
    targets 1, 2, ... are searched; the first conclusive refutation pins the
    exact value, and running out of targets yields an honest lower bound.
    """
    tile = _as_tile(spec, tile)
    if max_layers < 0:
        raise SpecError("layer bound must be non-negative")
    if spec.model == "grid" and spec.dim in (1, 2):
        witness = find_periodic_witness(spec, tile, bound=period_bound)
        if witness is not None:
            return HeeschCertificate(
                group=spec, cells=tuple(sorted_elements(spec, tile.cells)),
                connected=tile.connected,
                verdict={"kind": "tiles_periodic"}, witness=witness,
                centers=(), layers=(), radius=0, containment_radius=0,
                stats={"nodes": 0})
    last = _trivial_certificate(spec, tile)
    total = 0
    for k in range(1, max_layers + 1):
        got = heesch_ge(spec, tile, k, radius_cap=radius_cap,
                        deterministic=deterministic, threads=threads,
                        max_nodes=max_nodes)
        total += got.stats["nodes"]
        if isinstance(got, Exhausted):
            if got.conclusive:
                return replace(
                    last,
                    verdict={"kind": "exactly_within_radius", "n": k - 1,
                             "radius": got.radius},
                    radius=got.radius,
                    containment_radius=got.containment_radius,
                    stats={"nodes": total})
            return replace(last, stats={"nodes": total})
        last = got
    return replace(last, stats={"nodes": total})


def verify_certificate(spec, cert) -> bool:
    """Re-check a certificate without searching.

    Structural damage (missing fields, unknown verdict kinds) raises; any
    failed semantic check returns False.  The recorded radii are recomputed
    from the tile and verdict and must match exactly.  Search statistics are
    advisory and not re-checked, since they cannot be recomputed without the
    search.
    """
    if isinstance(cert, dict):
        cert = certificate_from_json(cert)
    kind = cert.verdict.get("kind")
    if kind not in ("at_least", "exactly_within_radius", "tiles_periodic"):
        raise SpecError("unknown verdict kind: %r" % (kind,))
    if spec_digest(spec) != spec_digest(cert.group):
        return False
    try:
        tile = make_tile(spec, cert.cells)
    except SpecError:
        return False
    if tile.connected != cert.connected:
        return False
    if kind == "tiles_periodic":
        if cert.witness is None:
            return False
        if cert.radius != 0 or cert.containment_radius != 0:
            return False
        if cert.centers or cert.layers:
            return False
        try:
            return verify_periodic(spec, tile, cert.witness)
        except SpecError:
            return False
    if cert.witness is not None:
        return False
    n = cert.verdict.get("n")
    if not isinstance(n, int) or n < 0:
        return False
    if IDENTITY not in cert.centers:
        return False
    try:
        tiling = PartialTiling(spec, tile, cert.centers)
    except SpecError:
        return False
    decomp = decompose_layers(spec, tiling)
    recorded = tuple(tuple(sorted_elements(spec, layer))
                     for layer in cert.layers)
    if recorded != decomp.layers:
        return False
    if kind == "at_least":
        r0 = containment_radius(spec, tile, n)
        if cert.radius != r0 or cert.containment_radius != r0:
            return False
        return n <= decomp.depth()
    if n != decomp.depth():
        return False
    refuted_r0 = containment_radius(spec, tile, n + 1)
    return cert.verdict.get("radius") == refuted_r0 and \
        cert.radius == refuted_r0 and \
        cert.containment_radius == refuted_r0


# -- periodic witness search (grid models) ------------------------------------------


def _exact_cover_torus(cells, res, points):
    """Exact cover of a finite torus by residue translates of `cells`.

    Returns the chosen center residues or None.  `res` maps an integer
    vector to its residue; `points` lists every residue in a fixed order.
    """
    k = len(cells)
    base = {res(f) for f in cells}
    if len(base) < k:
        return None
    cover = {}
    chosen = []

    def place(c):
        return [res(tuple(ci + fi for ci, fi in zip(c, f))) for f in cells]

    def solve():
        x = None
        for p in points:
            if p not in cover:
                x = p
                break
        if x is None:
            return True
        cands = sorted({res(tuple(xi - fi for xi, fi in zip(x, f)))
                        for f in cells})
        for c in cands:
            spots = place(c)
            if any(q in cover for q in spots):
                continue
            for q in spots:
                cover[q] = c
            chosen.append(c)
            if solve():
                return True
            chosen.pop()
            for q in spots:
                del cover[q]
        return False

    if solve():
        return list(chosen)
    return None


def find_periodic_witness(spec, tile, bound=DEFAULT_PERIOD_BOUND):
    """Search small-period lattices for a periodic tiling by the tile.

    Lattices are enumerated in Hermite form: dimension 1 uses periods (d,)
    and dimension 2 uses period pairs (a,0),(t,b) with a, b up to the bound
    and 0 <= t < a.  The first lattice admitting an exact cover of its torus
    wins; the returned witness is re-checked by the independent verifier.
    """
    tile = _as_tile(spec, tile)
    if spec.model != "grid" or spec.dim not in (1, 2):
        return None
    cells = sorted(grid_coords(spec, c) for c in tile.cells)
    k = len(cells)
    lattices = []
    if spec.dim == 1:
        for d in range(k, bound + 1):
            if d % k == 0:
                lattices.append(((d,),))
    else:
        for a in range(1, bound + 1):
            for b in range(1, bound + 1):
                if (a * b) % k or a * b < k:
                    continue
                for t in range(a):
                    lattices.append(((a, 0), (t, b)))
    for periods in lattices:
        if spec.dim == 1:
            d = periods[0][0]

            def res(v, d=d):
                return (v[0] % d,)

            points = [(i,) for i in range(d)]
        else:
            (a, _), (t, b) = periods

            def res(v, a=a, b=b, t=t):
                x, y = v
                v2 = y % b
                j = (y - v2) // b
                return ((x - j * t) % a, v2)

            points = [(u, v) for u in range(a) for v in range(b)]
        chosen = _exact_cover_torus(cells, res, points)
        if chosen is None:
            continue
        c0 = min(chosen)
        shifted = sorted({res(tuple(ci - zi for ci, zi in zip(c, c0)))
                          for c in chosen})
        centers = tuple(grid_element(spec, c) for c in shifted)
        witness = PeriodicWitness(periods=periods, centers=centers)
        if not verify_periodic(spec, tile, witness):
            raise RuntimeError("internal error: torus cover disagrees with "
                               "the periodic verifier")
        return witness
    return None
