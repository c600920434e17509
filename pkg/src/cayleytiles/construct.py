"""Constructive search for rigid transversal tiles of finite-index kernels.

Given a group with computable normal forms and a finite quotient acting
regularly on cosets, the routines here build a connected transversal A
(one element per coset) shaped so that copies of A, and of K = A u gA
for a shortest kernel element g, can only interlock the way the kernel
tiling does.  The stages are:

  check_premises   girth and detour conditions on the generating set
  geodesic_chain   canonical geodesic from 1 to g
  build_V0         seed set: chain tail, a punctured neighbor ring, sprouts
  connect_V        connectors joining the ring back to the chain
  extend_to_A      coset-by-coset completion to a full transversal
  verify_a1_a5     exact checks plus a bounded local uniqueness search
  assemble_K       the two-copy tile A u gA
  lift_tiling      pull a quotient tiling back through the projection
  run_stage        one full stage with radius bookkeeping

All searches are deterministic: candidates are visited in shortlex order
and ties never depend on set iteration order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import ResourceCapError, SpecError
from .groups import (
    IDENTITY,
    Element,
    GroupSpec,
    ball,
    default_max_ball,
    element,
    inverse,
    is_connected,
    length,
    mul,
    neighbors,
    normal_form,
    shortlex_key,
    sorted_elements,
)
from .heesch import Exhausted, heesch_ge
from .subgroups import (
    CosetTable,
    FiniteHom,
    build_coset_table,
    injectivity_radius,
    min_kernel_element,
    schreier_generators,
)
from .tiling import PartialTiling, Tile, make_tile, verify_partition

DEFAULT_DETOUR_CAP = 8
DEFAULT_EXTEND_NODES = 200_000
DEFAULT_UNIQUE_NODES = 2_000_000


def _word_str(g: Element) -> str:
    return "".join(g.word)


# -- premises -----------------------------------------------------------------------


@dataclass(frozen=True)
class TriplePath:
    """Shortest detour from x to y that avoids 1 and z; None if none found."""

    x: str
    y: str
    z: str
    length: int | None

    def to_json(self):
        return {"x": self.x, "y": self.y, "z": self.z, "length": self.length}


@dataclass(frozen=True)
class PremiseReport:
    """Outcome of the girth and detour checks on a generating set."""

    group: dict
    s_cap: int
    girth_ok: bool
    girth_witness: str | None
    triples: tuple[TriplePath, ...]
    s: int | None

    @property
    def ok(self) -> bool:
        return self.girth_ok and self.s is not None

    def to_json(self):
        return {
            "group": self.group,
            "s_cap": self.s_cap,
            "girth_ok": self.girth_ok,
            "girth_witness": self.girth_witness,
            "s": self.s,
            "ok": self.ok,
            "triples": [t.to_json() for t in self.triples],
        }


def _short_relation(spec) -> str | None:
    """Shortlex-least nonempty cyclically reduced word of length < 4 that is trivial."""
    syms = spec.symbols
    inv = spec.inverse_symbol
    for n in range(1, 4):
        for word in itertools.product(syms, repeat=n):
            reduced = all(word[i + 1] != inv[word[i]] for i in range(n - 1))
            if not reduced:
                continue
            if n >= 2 and word[0] == inv[word[-1]]:
                continue
            if normal_form(spec, word) == IDENTITY:
                return "".join(word)
    return None


def _detour_length(spec, start, goal, avoid, cap, max_size):
    """BFS distance from start to goal in the graph minus `avoid`, capped."""
    if start in avoid or goal in avoid:
        return None
    if start == goal:
        return 0
    limit = default_max_ball() if max_size is None else max_size
    seen = {start} | set(avoid)
    frontier = [start]
    for dist in range(1, cap + 1):
        nxt = []
        for x in frontier:
            for y in neighbors(spec, x):
                if y == goal:
                    return dist
                if y not in seen:
                    seen.add(y)
                    if len(seen) > limit:
                        raise ResourceCapError(
                            f"detour search exceeded {limit} elements")
                    nxt.append(y)
        frontier = nxt
        if not frontier:
            return None
    return None


def check_premises(spec, s_cap: int = DEFAULT_DETOUR_CAP, max_size=None) -> PremiseReport:
    """Check the expansion premises of a generating set.

    girth_ok: no nonempty cyclically reduced word of length < 4 is trivial.
    Detours: for every ordered triple of distinct symbols (x, y, z) there is
    a path from x to y avoiding both 1 and z, of length at most s_cap.  The
    bound s is the largest such length; exhausting s_cap is reported as a
    failed premise (s = None), not as an error.
    """
    syms = spec.symbols
    if len(syms) < 4:
        raise SpecError("premise check needs at least four generator symbols")
    witness = _short_relation(spec)
    elems = {s: normal_form(spec, (s,)) for s in syms}
    rows = []
    cache: dict[tuple[frozenset, str], int | None] = {}
    for x, y, z in itertools.permutations(syms, 3):
        key = (frozenset((x, y)), z)
        if key not in cache:
            cache[key] = _detour_length(
                spec, elems[x], elems[y], {IDENTITY, elems[z]}, s_cap, max_size)
        rows.append(TriplePath(x=x, y=y, z=z, length=cache[key]))
    lengths = [r.length for r in rows]
    s = max(lengths) if all(l is not None for l in lengths) else None
    return PremiseReport(group=spec.to_json(), s_cap=s_cap, girth_ok=witness is None,
                         girth_witness=witness, triples=tuple(rows), s=s)


# -- geodesic chain -----------------------------------------------------------------


def geodesic_chain(spec, g: Element) -> tuple[Element, ...]:
    """Shortlex-least geodesic 1 = x_0, x_1, ..., x_{n+1} = g, step by step.

    Each x_{i+1} is the shortlex-least neighbor of x_i that is one step
    farther from 1 and one step closer to g.
    """
    if g == IDENTITY:
        raise SpecError("the chain needs a nontrivial endpoint")
    total = length(spec, g)
    chain = [IDENTITY]
    cur = IDENTITY
    for i in range(1, total + 1):
        cands = [y for y in neighbors(spec, cur)
                 if length(spec, y) == i
                 and length(spec, mul(spec, inverse(spec, y), g)) == total - i]
        if not cands:
            raise SpecError(f"no geodesic step from {cur} toward {g}")
        cur = min(cands, key=lambda y: shortlex_key(spec, y))
        chain.append(cur)
    return tuple(chain)


# -- seed set -----------------------------------------------------------------------


@dataclass(frozen=True)
class SeedSet:
    """Chain tail, punctured neighbor ring U1, sprouts U2, and their union V0."""

    chain: tuple[Element, ...]
    a: Element
    b: Element
    u1: tuple[Element, ...]
    u2: tuple[Element, ...]
    selection: tuple[tuple[Element, Element], ...]
    v0: tuple[Element, ...]

    def to_json(self):
        return {
            "chain": [_word_str(x) for x in self.chain],
            "a": _word_str(self.a),
            "b": _word_str(self.b),
            "u1": [_word_str(x) for x in self.u1],
            "u2": [_word_str(x) for x in self.u2],
            "selection": [[_word_str(x), _word_str(y)] for x, y in self.selection],
            "v0": [_word_str(x) for x in self.v0],
        }


def build_V0(spec, chain, table: CosetTable | None = None) -> SeedSet:
    """Build the seed set around the tip of the chain.

    With x_n the last interior vertex and g the endpoint: U1 is the neighbor
    ring of x_n minus g; every ring element other than x_{n-1} picks a sprout
    y(x) at distance 2 from x_n whose step avoids a and its inverse, chosen so
    each ring element sees exactly one sprout among its neighbors (x_{n-1} may
    see at most one).  Sprout sharing is allowed when that stays true.
    """
    if len(chain) < 3:
        raise SpecError("the chain must have an interior vertex; "
                        "the endpoint is too close to the identity")
    x_n, g, x_prev = chain[-2], chain[-1], chain[-3]
    a = mul(spec, inverse(spec, x_n), g)
    b = chain[1]
    if b == inverse(spec, a):
        raise SpecError("the first chain step inverts the last; "
                        "the endpoint is not a shortest kernel element")
    a_inv = inverse(spec, a)
    u1 = sorted_elements(spec, set(neighbors(spec, x_n)) - {g})
    if x_prev not in u1:
        raise SpecError("chain predecessor missing from the neighbor ring")
    ring = [x for x in u1 if x != x_prev]
    blocked = set(chain[:-2]) | set(u1) | {x_n, g}
    x_n_inv = inverse(spec, x_n)
    cands = []
    for x in ring:
        opts = []
        for y in neighbors(spec, x):
            if y in blocked:
                continue
            if length(spec, mul(spec, x_n_inv, y)) != 2:
                continue
            step = mul(spec, inverse(spec, x), y)
            if step in (a, a_inv):
                continue
            opts.append(y)
        opts = sorted_elements(spec, opts)
        if not opts:
            raise SpecError(f"no sprout available for ring element {x}")
        cands.append(opts)

    def valid(assign):
        u2 = set(assign)
        for x, y in zip(ring, assign):
            seen = [w for w in neighbors(spec, x) if w in u2]
            if seen != [y] and set(seen) != {y}:
                return False
        prev_seen = [w for w in neighbors(spec, x_prev) if w in u2]
        return len(set(prev_seen)) <= 1

    chosen = None
    for assign in itertools.product(*cands):
        if valid(assign):
            chosen = assign
            break
    if chosen is None:
        raise SpecError("no sprout selection keeps one sprout per ring element")
    u2 = sorted_elements(spec, set(chosen))
    v0 = sorted_elements(spec, set(chain[:-2]) | set(u1) | set(u2))
    if table is not None:
        _require_injective(spec, table, v0, "seed set")
        if len(v0) >= table.degree:
            raise SpecError(f"seed set has {len(v0)} elements but the quotient "
                            f"only has {table.degree} cosets")
    return SeedSet(chain=tuple(chain), a=a, b=b, u1=tuple(u1), u2=tuple(u2),
                   selection=tuple(zip(ring, chosen)), v0=tuple(v0))


def _require_injective(spec, table, elements, label):
    seen = {}
    for x in elements:
        p = table.point_of(x)
        if p in seen:
            raise SpecError(f"{label} is not injective on cosets: "
                            f"{seen[p]} and {x} both map to point {p}")
        seen[p] = x
    return seen


# -- connectors ---------------------------------------------------------------------


@dataclass(frozen=True)
class ConnectedSeed:
    """Seed set plus connectors and, when needed, a bridge next to g."""

    v: tuple[Element, ...]
    connectors: tuple[tuple[str, tuple[Element, ...]], ...]
    bridge: tuple[Element, ...] | None

    def to_json(self):
        return {
            "v": [_word_str(x) for x in self.v],
            "connectors": {s: [_word_str(x) for x in path]
                           for s, path in self.connectors},
            "bridge": None if self.bridge is None
            else [_word_str(x) for x in self.bridge],
        }


def _paths(spec, start, goal, avoid, cap, max_size, max_nodes=50_000):
    """Yield simple start-goal paths avoiding `avoid`, by (length, shortlex).

    Exploration stops quietly once max_nodes path extensions were tried, so
    callers never burn unbounded time rejecting every candidate.
    """
    limit = default_max_ball() if max_size is None else max_size
    dist = {goal: 0}
    frontier = [goal]
    for d in range(1, cap + 1):
        nxt = []
        for x in frontier:
            for y in neighbors(spec, x):
                if y in avoid or y in dist:
                    continue
                dist[y] = d
                if len(dist) > limit:
                    raise ResourceCapError(f"path search exceeded {limit} elements")
                nxt.append(y)
        frontier = nxt
    if start not in dist:
        return
    budget = [max_nodes]
    for total in range(dist[start], cap + 1):

        def walk(cur, path):
            remaining = total - (len(path) - 1)
            if cur == goal and remaining == 0:
                yield path
                return
            if remaining <= 0 or dist.get(cur, cap + 1) > remaining:
                return
            for y in sorted(neighbors(spec, cur), key=lambda w: shortlex_key(spec, w)):
                if y in avoid or y in path:
                    continue
                budget[0] -= 1
                if budget[0] < 0:
                    return
                yield from walk(y, path + (y,))

        yield from walk(start, (start,))
        if budget[0] < 0:
            return


def _first_injective_path(spec, table, start, goal, avoid, cap, existing, max_size):
    """First path whose new vertices keep coset-injectivity with `existing`."""
    base_pts = None if table is None else {table.point_of(x) for x in existing}
    for path in _paths(spec, start, goal, avoid, cap, max_size):
        if table is None:
            return path
        pts = set(base_pts)
        ok = True
        for x in path:
            if x in existing:
                continue
            p = table.point_of(x)
            if p in pts:
                ok = False
                break
            pts.add(p)
        if ok:
            return path
    return None


def connect_V(spec, seed: SeedSet, chain=None, table: CosetTable | None = None,
              path_cap: int = 16, max_size=None) -> ConnectedSeed:
    """Join the ring back to the chain and make V adjacent to g.

    For every generator step t other than the one leading from x_n to g, a
    shortest path from x_n t to x_{n-1} avoiding x_n and g is added, the
    shortlex-least one that keeps coset-injectivity.  If no element of the
    result neighbors g, a shortest bridge from a neighbor of g into the set
    is added as well, so the adjacency condition holds before extension.
    """
    chain = seed.chain if chain is None else tuple(chain)
    x_n, g, x_prev = chain[-2], chain[-1], chain[-3]
    avoid = {x_n, g}
    v = set(seed.v0)
    connectors = []
    for s in spec.symbols:
        step = normal_form(spec, (s,))
        if step == seed.a:
            continue
        start = mul(spec, x_n, step)
        if start == x_prev:
            connectors.append((s, (start,)))
            continue
        path = _first_injective_path(spec, table, start, x_prev, avoid,
                                     path_cap, v, max_size)
        if path is None:
            raise SpecError(f"no connector from {start} back to {x_prev} "
                            f"within {path_cap} steps")
        v |= set(path)
        connectors.append((s, path))
    bridge = None
    if not (set(neighbors(spec, g)) & v):
        options = []
        taken = None if table is None else {table.point_of(x) for x in v}
        for u in sorted_elements(spec, set(neighbors(spec, g)) - {x_n}):
            if taken is not None and table.point_of(u) in taken:
                continue
            for tgt in sorted_elements(spec, v):
                path = _first_injective_path(spec, table, u, tgt, avoid,
                                             path_cap, v, max_size)
                if path is not None:
                    options.append((len(path), shortlex_key(spec, u),
                                    shortlex_key(spec, tgt), path))
        if not options:
            raise SpecError("cannot reach any neighbor of g from the seed set")
        bridge = min(options)[3]
        v |= set(bridge)
    if not is_connected(spec, v):
        raise SpecError("seed set with connectors is not connected")
    if table is not None:
        _require_injective(spec, table, sorted_elements(spec, v), "connected seed")
        if len(v) >= table.degree:
            raise SpecError(f"connected seed has {len(v)} elements but the "
                            f"quotient only has {table.degree} cosets")
    return ConnectedSeed(v=tuple(sorted_elements(spec, v)),
                         connectors=tuple(connectors), bridge=bridge)


# -- extension to a transversal -----------------------------------------------------


@dataclass(frozen=True)
class ConstructionTrace:
    """Every stage of one construction, machine-checkable step by step."""

    g: Element
    chain: tuple[Element, ...]
    a: Element
    b: Element
    u1: tuple[Element, ...]
    u2: tuple[Element, ...]
    selection: tuple[tuple[Element, Element], ...]
    v0: tuple[Element, ...]
    connectors: tuple[tuple[str, tuple[Element, ...]], ...]
    bridge: tuple[Element, ...] | None
    v: tuple[Element, ...]
    snapshots: tuple[tuple[tuple[Element, ...], int], ...]
    transversal: tuple[Element, ...]
    nodes: int

    def to_json(self):
        return {
            "g": _word_str(self.g),
            "chain": [_word_str(x) for x in self.chain],
            "a": _word_str(self.a),
            "b": _word_str(self.b),
            "u1": [_word_str(x) for x in self.u1],
            "u2": [_word_str(x) for x in self.u2],
            "selection": [[_word_str(x), _word_str(y)] for x, y in self.selection],
            "v0": [_word_str(x) for x in self.v0],
            "connectors": {s: [_word_str(x) for x in p] for s, p in self.connectors},
            "bridge": None if self.bridge is None
            else [_word_str(x) for x in self.bridge],
            "v": [_word_str(x) for x in self.v],
            "snapshots": [{"added": [_word_str(x) for x in add], "pockets": k}
                          for add, k in self.snapshots],
            "transversal": [_word_str(x) for x in self.transversal],
            "nodes": self.nodes,
        }


def _pockets(spec, cells, a, a_inv):
    """Cells x with xa inside the set, other than the inverse of a.

    Each such x starts a strictly forced continuation in any surrounding
    tiling, so the extension keeps their number as low as it can.
    """
    out = []
    for x in cells:
        if x == a_inv:
            continue
        if mul(spec, x, a) in cells:
            out.append(x)
    return out


def extend_to_A(spec, table: CosetTable, v, chain, seed: SeedSet | None = None,
                connected: ConnectedSeed | None = None,
                max_nodes: int = DEFAULT_EXTEND_NODES) -> ConstructionTrace:
    """Grow the connected seed into a full transversal of the cosets.

    Backtracking search; each step adds one frontier element with a fresh
    coset (or a pair when every single candidate opens a pocket), never x_n
    or g, preferring candidates that open no pocket and breaking ties by
    shortlex.  Runs until every coset is represented; exhaustion raises with
    the blocking state.
    """
    chain = tuple(chain)
    x_n, g = chain[-2], chain[-1]
    if seed is None:
        a = mul(spec, inverse(spec, x_n), g)
    else:
        a = seed.a
    a_inv = inverse(spec, a)
    a_inv_pt = table.point_of(a_inv)
    start = sorted_elements(spec, v)
    used = _require_injective(spec, table, start, "extension start")
    cells = set(start)
    degree = table.degree
    snapshots: list[tuple[tuple[Element, ...], int]] = []
    nodes = 0

    def frontier(cells, used):
        pool = {}
        for u in cells:
            for w in neighbors(spec, u):
                if w in cells or w == x_n or w == g:
                    continue
                p = table.point_of(w)
                if p in used or w in pool:
                    continue
                pool[w] = p
        return sorted(pool.items(), key=lambda it: shortlex_key(spec, it[0]))

    def delta(cells, w):
        d = 0
        if w != a_inv and mul(spec, w, a) in cells:
            d += 1
        back = mul(spec, w, a_inv)
        if back in cells and back != a_inv:
            d += 1
        return d

    def dfs(cells, used):
        nonlocal nodes
        if len(cells) == degree:
            return True
        nodes += 1
        if nodes > max_nodes:
            raise ResourceCapError(f"extension search exceeded {max_nodes} nodes")
        cand = frontier(cells, used)
        entries = [(delta(cells, w), 0, (shortlex_key(spec, w),), ((w, p),))
                   for w, p in cand]
        if entries and min(e[0] for e in entries) > 0:
            for w, p in cand:
                for w2 in sorted(neighbors(spec, w),
                                 key=lambda y: shortlex_key(spec, y)):
                    if w2 in cells or w2 in (x_n, g):
                        continue
                    p2 = table.point_of(w2)
                    if p2 in used or p2 == p:
                        continue
                    if table.point_of(mul(spec, inverse(spec, w2), w)) == a_inv_pt:
                        continue
                    trial = cells | {w, w2}
                    d = len(_pockets(spec, trial, a, a_inv)) - \
                        len(_pockets(spec, cells, a, a_inv))
                    entries.append((d, 1, (shortlex_key(spec, w),
                                           shortlex_key(spec, w2)),
                                    ((w, p), (w2, p2))))
        for _, _, _, add in sorted(entries):
            new_cells = cells | {w for w, _ in add}
            new_used = dict(used)
            for w, p in add:
                new_used[p] = w
            snapshots.append((tuple(w for w, _ in add),
                              len(_pockets(spec, new_cells, a, a_inv))))
            if dfs(new_cells, new_used):
                return True
            snapshots.pop()
        return False

    if not dfs(set(cells), dict(used)):
        missing = sorted(set(range(degree)) - set(used))
        raise SpecError("extension exhausted without covering every coset; "
                        f"reached {len(cells)} of {degree} cosets, "
                        f"missing points {missing}")
    final = set(start)
    for add, _ in snapshots:
        final |= set(add)
    transversal = sorted_elements(spec, final)
    connectors = connected.connectors if connected is not None else ()
    bridge = connected.bridge if connected is not None else None
    if seed is None:
        seed = build_V0(spec, chain)
    return ConstructionTrace(
        g=g, chain=chain, a=a, b=seed.b, u1=seed.u1, u2=seed.u2,
        selection=seed.selection, v0=seed.v0, connectors=connectors,
        bridge=bridge, v=tuple(start), snapshots=tuple(snapshots),
        transversal=tuple(transversal), nodes=nodes)


# -- verification -------------------------------------------------------------------


@dataclass(frozen=True)
class TransversalReport:
    """All five transversal conditions, with the uniqueness radius used."""

    index: int
    size_ok: bool
    identity_ok: bool
    injective: bool
    gap_to_g: int
    diameter: int
    radius: int
    agreement_radius: int
    unique_ok: bool
    nodes: int

    def to_json(self):
        return {
            "index": self.index,
            "size_ok": self.size_ok,
            "identity_ok": self.identity_ok,
            "injective": self.injective,
            "gap_to_g": self.gap_to_g,
            "diameter": self.diameter,
            "radius": self.radius,
            "agreement_radius": self.agreement_radius,
            "unique_ok": self.unique_ok,
            "nodes": self.nodes,
        }


def _diameter(spec, cells) -> int:
    cells = list(cells)
    best = 0
    for i, u in enumerate(cells):
        inv_u = inverse(spec, u)
        for w in cells[i + 1:]:
            best = max(best, length(spec, mul(spec, inv_u, w)))
    return best


def verify_a1_a5(spec, table: CosetTable, A, g: Element,
                 R_unique: int | None = None,
                 max_nodes: int = DEFAULT_UNIQUE_NODES,
                 max_size=None) -> TransversalReport:
    """Verify the transversal conditions exactly, and uniqueness locally.

    (1) |A| equals the index, (2) 1 in A, (3) one element per coset,
    (4) d(g, A) = 1, each checked exactly; failure raises naming the
    condition and a witness.  (5) is checked on the ball of radius R_unique
    (default 3 * diam(A)): every tiling of that ball by copies of A that
    includes the copy at 1 must agree, on the ball of radius
    R_unique - diam(A) - 1, with the kernel tiling; a divergent completion
    raises with its centers.
    """
    A = sorted_elements(spec, A)
    cells = set(A)
    degree = table.degree
    if len(cells) != degree:
        raise SpecError(f"size condition fails: |A| = {len(cells)}, "
                        f"index = {degree}")
    if IDENTITY not in cells:
        raise SpecError("identity condition fails: 1 is not in A")
    rep = {}
    for x in A:
        p = table.point_of(x)
        if p in rep:
            raise SpecError(f"injectivity condition fails: {rep[p]} and {x} "
                            f"share coset point {p}")
        rep[p] = x
    gap = min(length(spec, mul(spec, inverse(spec, g), u)) for u in A)
    if gap != 1:
        raise SpecError(f"adjacency condition fails: d(g, A) = {gap}")
    diam = _diameter(spec, A)
    radius = 3 * diam if R_unique is None else R_unique
    agreement = radius - diam - 1
    if agreement < 1:
        raise SpecError(f"uniqueness radius {radius} is too small for a tile "
                        f"of diameter {diam}")
    region = ball(spec, IDENTITY, radius, max_size=max_size)
    small = [x for x in region if length(spec, x) <= agreement]
    kernel_owner = {x: mul(spec, x, inverse(spec, rep[table.point_of(x)]))
                    for x in small}
    tile = make_tile(spec, cells)
    kernel_centers = sorted_elements(
        spec, {mul(spec, x, inverse(spec, rep[table.point_of(x)])) for x in region})
    kernel_tiling = PartialTiling(spec, tile, kernel_centers)
    if not verify_partition(spec, kernel_tiling, region):
        raise SpecError("kernel tiling fails to partition the verification ball")

    order = sorted_elements(spec, region)
    shifts = sorted_elements(spec, [inverse(spec, u) for u in A])
    small_set = set(small)
    covered: dict[Element, Element] = {}
    nodes = 0

    def place(c):
        got = []
        for u in A:
            cell = mul(spec, c, u)
            if cell in covered:
                for prev in got:
                    del covered[prev]
                return None
            covered[cell] = c
            got.append(cell)
        return got

    def unplace(got):
        for cell in got:
            del covered[cell]

    def solve(start_idx, small_left, diverged, centers):
        nonlocal nodes
        if small_left == 0 and not diverged:
            return
        idx = start_idx
        while idx < len(order) and order[idx] in covered:
            idx += 1
        if idx == len(order):
            raise SpecError(
                "local uniqueness fails: a tiling of the verification ball "
                "diverges from the kernel tiling near the identity; centers: "
                + ", ".join(_word_str(c) or "1" for c in centers))
        nodes += 1
        if nodes > max_nodes:
            raise ResourceCapError(
                f"uniqueness search exceeded {max_nodes} nodes")
        cell = order[idx]
        for shift in shifts:
            c = mul(spec, cell, shift)
            got = place(c)
            if got is None:
                continue
            gained = sum(1 for w in got if w in small_set)
            bad = diverged or any(
                w in small_set and kernel_owner[w] != c for w in got)
            solve(idx, small_left - gained, bad, centers + (c,))
            unplace(got)

    got0 = place(IDENTITY)
    if got0 is None:
        raise SpecError("the copy of A at the identity overlaps itself")
    start_small = sum(1 for w in got0 if w in small_set)
    solve(0, len(small) - start_small, False, (IDENTITY,))
    return TransversalReport(
        index=degree, size_ok=True, identity_ok=True, injective=True,
        gap_to_g=gap, diameter=diam, radius=radius, agreement_radius=agreement,
        unique_ok=True, nodes=nodes)


# -- assembly and lifting -----------------------------------------------------------


def assemble_K(spec, A, a1: Element) -> Tile:
    """The two-copy tile K = A u a1 A; the copies must not meet."""
    base = set(A)
    shifted = {mul(spec, a1, u) for u in base}
    overlap = base & shifted
    if overlap:
        witness = sorted_elements(spec, overlap)[0]
        raise SpecError(f"A and a1 A overlap at {witness}; the transversal "
                        "conditions cannot all hold")
    tile = make_tile(spec, base | shifted)
    if not tile.connected:
        raise SpecError("A u a1 A is not connected; adjacency to the kernel "
                        "element is missing")
    return tile


def lift_tiling(spec, table: CosetTable, F, centers_prime, region) -> PartialTiling:
    """Lift a tiling of the quotient by the image of F back to the group.

    F must be injective on cosets.  centers_prime are coset points (or
    representative words) whose placements partition the quotient.  The
    result uses every center rep(c') n (n in the kernel) whose placement
    meets the region, and is verified to partition the region.
    """
    cells = sorted_elements(spec, F.cells if isinstance(F, Tile) else F)
    tile = F if isinstance(F, Tile) else make_tile(spec, cells)
    pts = []
    seen = {}
    for f in cells:
        p = table.point_of(f)
        if p in seen:
            raise SpecError(f"projection is not injective on the tile: "
                            f"{seen[p]} and {f} land on point {p}")
        seen[p] = f
        pts.append((f, p))
    cpoints = []
    for c in centers_prime:
        if isinstance(c, int):
            p = c
        else:
            word = c.word if isinstance(c, Element) else element(spec, c).word
            p = table.hom.act(0, word)
        if not 0 <= p < table.degree:
            raise SpecError(f"coset point {p} out of range")
        cpoints.append(p)
    if len(set(cpoints)) != len(cpoints):
        raise SpecError("duplicate quotient centers")
    covered_pts = {}
    for p in cpoints:
        for f, _ in pts:
            q = table.hom.act(p, f.word)
            if q in covered_pts:
                raise SpecError(f"quotient placements overlap at point {q}")
            covered_pts[q] = p
    if len(covered_pts) != table.degree:
        raise SpecError(f"quotient placements cover {len(covered_pts)} of "
                        f"{table.degree} points; the image does not tile")
    region = sorted_elements(spec, region)
    if not region:
        raise SpecError("the region is empty")
    cset = set(cpoints)
    centers = set()
    for x in region:
        for f in cells:
            c = mul(spec, x, inverse(spec, f))
            if table.point_of(c) in cset:
                centers.add(c)
    tiling = PartialTiling(spec, tile, sorted_elements(spec, centers))
    if not verify_partition(spec, tiling, region):
        raise SpecError("lifted placements do not partition the region")
    return tiling


# -- pipeline and stages ------------------------------------------------------------


@dataclass(frozen=True)
class PipelineResult:
    """Everything one construction run produces, in order."""

    premises: PremiseReport
    g: Element
    seed: SeedSet
    connected: ConnectedSeed
    trace: ConstructionTrace
    report: TransversalReport
    K: Tile

    def to_json(self, spec):
        from .tiling import tile_to_json
        return {
            "premises": self.premises.to_json(),
            "g": _word_str(self.g),
            "seed": self.seed.to_json(),
            "connected": self.connected.to_json(),
            "trace": self.trace.to_json(),
            "report": self.report.to_json(),
            "K": tile_to_json(spec, self.K),
        }


def run_pipeline(spec, hom: FiniteHom, s_cap: int = DEFAULT_DETOUR_CAP,
                 path_cap: int = 16, R_unique: int | None = None,
                 extend_nodes: int = DEFAULT_EXTEND_NODES,
                 unique_nodes: int = DEFAULT_UNIQUE_NODES,
                 max_size=None) -> PipelineResult:
    """Premises, chain, seed, connectors, extension, verification, assembly.

    Refuses to run when the premises fail; there is no best-effort mode.
    """
    if hom.domain.to_json() != spec.to_json():
        raise SpecError("the quotient map is not defined on this group")
    premises = check_premises(spec, s_cap=s_cap, max_size=max_size)
    if not premises.ok:
        raise SpecError("premises fail; refusing to construct "
                        f"(girth_ok={premises.girth_ok}, s={premises.s})")
    table = build_coset_table(hom)
    g = min_kernel_element(spec, table, cap=2 * table.degree + 2,
                           max_size=max_size)
    chain = geodesic_chain(spec, g)
    seed = build_V0(spec, chain, table)
    connected = connect_V(spec, seed, chain, table, path_cap=path_cap,
                          max_size=max_size)
    trace = extend_to_A(spec, table, connected.v, chain, seed, connected,
                        max_nodes=extend_nodes)
    report = verify_a1_a5(spec, table, trace.transversal, g, R_unique=R_unique,
                          max_nodes=unique_nodes, max_size=max_size)
    K = assemble_K(spec, trace.transversal, g)
    return PipelineResult(premises=premises, g=g, seed=seed, connected=connected,
                          trace=trace, report=report, K=K)


@dataclass(frozen=True)
class StageRecord:
    """One stage: construction, radii bookkeeping, and the surround check."""

    stage: int
    s: int
    p: int
    a1: Element
    index: int
    basis: tuple[Element, ...]
    basis_min_ok: bool
    r_stage: int
    condition_radius: int
    power_radius: int
    required_radius: int
    measured: object | None
    injectivity_ok: bool | None
    heesch_target: float
    pipeline: PipelineResult
    certificate: object
    kernel_quotient: dict | None
    next_group: dict | None

    def to_json(self, spec):
        from .heesch import certificate_to_json
        return {
            "stage": self.stage,
            "s": self.s,
            "p": self.p,
            "a1": _word_str(self.a1),
            "index": self.index,
            "basis": [_word_str(x) for x in self.basis],
            "basis_min_ok": self.basis_min_ok,
            "r_stage": self.r_stage,
            "condition_radius": self.condition_radius,
            "power_radius": self.power_radius,
            "required_radius": self.required_radius,
            "measured": None if self.measured is None else self.measured.to_json(),
            "injectivity_ok": self.injectivity_ok,
            "heesch_target": self.heesch_target,
            "pipeline": self.pipeline.to_json(spec),
            "certificate": certificate_to_json(self.certificate),
            "kernel_quotient": self.kernel_quotient,
            "next_group": self.next_group,
        }


def run_stage(spec, hom: FiniteHom, p: int, stage: int = 0,
              s_cap: int = DEFAULT_DETOUR_CAP, basis=None,
              r_prev: int | None = None, next_spec: GroupSpec | None = None,
              R_unique: int | None = None, max_size=None,
              heesch_max_nodes: int = 2_000_000) -> StageRecord:
    """Run one stage of the iterated construction.

    Builds the transversal and K for the given quotient, fixes the radius
    r for this stage (10 s at stage zero, the supplied word-norm bound
    afterwards), computes the radius the next quotient must be injective
    on, measures that radius when the next group is supplied, and confirms
    with a surround search that K admits at least one crown.  The target
    p / 2 is recorded, not proved.
    """
    if p < 1 or p % 2 == 0:
        raise SpecError(f"the exponent must be odd and positive, got {p}")
    pipeline = run_pipeline(spec, hom, s_cap=s_cap, R_unique=R_unique,
                            max_size=max_size)
    table = build_coset_table(hom)
    if basis is not None:
        basis_elems = tuple(x if isinstance(x, Element) else element(spec, x)
                            for x in basis)
        for h in basis_elems:
            if table.point_of(h) != 0:
                raise SpecError(f"basis word {h} is not in the kernel")
    elif spec.model in ("free", "free_product_cyclic"):
        basis_elems = schreier_generators(table).generators
    else:
        raise SpecError("a kernel basis must be supplied for rewriting groups")
    a1 = pipeline.g
    basis_min_ok = min(length(spec, h) for h in basis_elems) == length(spec, a1)
    s = pipeline.premises.s
    if stage == 0:
        r_stage = 10 * s
    else:
        if r_prev is None:
            raise SpecError("stages past the first need the word-norm bound "
                            "of the earlier tiles (r_prev)")
        r_stage = r_prev
    condition_radius = (stage + 1) * (r_stage + 1)
    power = IDENTITY
    power_radius = 0
    for _ in range(10 * (stage + 1)):
        power = mul(spec, power, a1)
        power_radius = max(power_radius, length(spec, power))
    required = max(condition_radius, power_radius)
    measured = None
    injective_ok = None
    if next_spec is not None:
        measured = injectivity_radius(spec, next_spec, cap=required,
                                      max_size=max_size)
        injective_ok = measured.radius >= required
    certificate = heesch_ge(spec, pipeline.K, 1, max_nodes=heesch_max_nodes)
    if isinstance(certificate, Exhausted):
        raise SpecError("surround search refuted a crown for K; "
                        "the construction is inconsistent")
    kernel_quotient = None
    if spec.model in ("free", "free_product_cyclic"):
        kernel_quotient = {"model": "free_product_cyclic",
                           "orders": [p] * len(basis_elems)}
    return StageRecord(
        stage=stage, s=s, p=p, a1=a1, index=table.degree, basis=basis_elems,
        basis_min_ok=basis_min_ok, r_stage=r_stage,
        condition_radius=condition_radius, power_radius=power_radius,
        required_radius=required, measured=measured, injectivity_ok=injective_ok,
        heesch_target=p / 2, pipeline=pipeline, certificate=certificate,
        kernel_quotient=kernel_quotient,
        next_group=None if next_spec is None else next_spec.to_json())


# -- fixture search -----------------------------------------------------------------


@dataclass(frozen=True)
class FixtureCandidate:
    """A two-generator one-relator group that passes the premises."""

    relator: str
    spec: GroupSpec
    report: PremiseReport

    def to_json(self):
        return {"relator": self.relator, "group": self.spec.to_json(),
                "report": self.report.to_json()}


_FIXTURE_SYMS = ("a", "a'", "b", "b'")
_FIXTURE_INV = {"a": "a'", "a'": "a", "b": "b'", "b'": "b"}


def _free_reduce(word):
    out = []
    for s in word:
        if out and out[-1] == _FIXTURE_INV[s]:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def _relator_canon(word):
    """Least shortlex form over rotations of the word and of its inverse."""
    inv = tuple(_FIXTURE_INV[s] for s in reversed(word))
    rank = {s: i for i, s in enumerate(_FIXTURE_SYMS)}
    best = None
    for w in (word, inv):
        for i in range(len(w)):
            rot = w[i:] + w[:i]
            key = tuple(rank[s] for s in rot)
            if best is None or key < best[0]:
                best = (key, rot)
    return best[1]


def _rewrite(word, rules, guard=10_000):
    word = list(word)
    for _ in range(guard):
        hit = False
        for lhs, rhs in rules:
            n = len(lhs)
            for i in range(len(word) - n + 1):
                if tuple(word[i:i + n]) == lhs:
                    word[i:i + n] = rhs
                    hit = True
                    break
            if hit:
                break
        if not hit:
            return tuple(word)
    raise ResourceCapError("rewriting did not settle")


def _complete_rules(relator, max_rules=32, max_iter=120, max_lhs=10):
    """Bounded completion of the relator into a confluent shortlex system.

    Returns the non-cancellation rules as string pairs, or None when the
    bounds are hit first.  The result is re-validated independently by the
    group model's own critical-pair check.
    """
    rank = {s: i for i, s in enumerate(_FIXTURE_SYMS)}
    key = lambda w: (len(w), tuple(rank[s] for s in w))
    cancels = {((s, _FIXTURE_INV[s]), ()) for s in _FIXTURE_SYMS}

    def orient(u, v):
        u, v = _free_reduce(u), _free_reduce(v)
        if u == v:
            return None
        return (u, v) if key(u) > key(v) else (v, u)

    first = orient(relator, ())
    if first is None:
        return None
    rules = set(cancels)
    rules.add(first)
    for _ in range(max_iter):
        ordered = sorted(rules, key=lambda r: (key(r[0]), key(r[1])))
        new = None
        for l1, r1 in ordered:
            for l2, r2 in ordered:
                spots = []
                for i in range(len(l1) - len(l2) + 1):
                    if (l1, r1) == (l2, r2) and i == 0:
                        continue
                    if l1[i:i + len(l2)] == l2:
                        spots.append((_rewrite(r1, ordered),
                                      _rewrite(l1[:i] + r2 + l1[i + len(l2):],
                                               ordered)))
                for t in range(1, min(len(l1), len(l2))):
                    if l1[len(l1) - t:] == l2[:t]:
                        spots.append((_rewrite(r1 + l2[t:], ordered),
                                      _rewrite(l1[:len(l1) - t] + r2, ordered)))
                for one, two in spots:
                    rule = orient(one, two)
                    if rule is not None and rule not in rules:
                        if len(rule[0]) > max_lhs:
                            return None
                        new = rule
                        break
                if new:
                    break
            if new:
                break
        if new is None:
            break
        rules.add(new)
        if len(rules) > max_rules:
            return None
        # drop rules whose left side another rule already reduces
        ordered = sorted(rules, key=lambda r: (key(r[0]), key(r[1])))
        keep = set()
        for lhs, rhs in rules:
            others = [r for r in ordered if r != (lhs, rhs)]
            if _rewrite(lhs, others) == lhs:
                keep.add((lhs, _rewrite(rhs, others)))
        rules = keep | cancels
    else:
        return None
    out = sorted((r for r in rules if r not in cancels),
                 key=lambda r: (key(r[0]), key(r[1])))
    if not out:
        return None
    return [["".join(lhs), "".join(rhs)] for lhs, rhs in out]


def search_premise_fixtures(min_len: int = 4, max_len: int = 8,
                            s_cap: int = DEFAULT_DETOUR_CAP,
                            limit: int | None = None,
                            max_size=None) -> tuple[FixtureCandidate, ...]:
    """Scan one-relator two-generator groups for premise-passing fixtures.

    Relators run in shortlex order over cyclically reduced words of the
    given lengths, deduplicated up to rotation and inversion.  A candidate
    counts only when bounded completion yields a system the group model
    validates and the premise check then passes.
    """
    found = []
    seen = set()
    for n in range(min_len, max_len + 1):
        for word in itertools.product(_FIXTURE_SYMS, repeat=n):
            if any(word[i + 1] == _FIXTURE_INV[word[i]] for i in range(n - 1)):
                continue
            if word[0] == _FIXTURE_INV[word[-1]]:
                continue
            canon = _relator_canon(word)
            if canon != word or canon in seen:
                continue
            seen.add(canon)
            rules = _complete_rules(word)
            if rules is None:
                continue
            try:
                spec = GroupSpec.rewriting(["a", "b"], ["a'", "b'"], rules)
            except SpecError:
                continue
            try:
                report = check_premises(spec, s_cap=s_cap, max_size=max_size)
            except ResourceCapError:
                continue
            if report.ok:
                found.append(FixtureCandidate(relator="".join(word), spec=spec,
                                              report=report))
                if limit is not None and len(found) >= limit:
                    return tuple(found)
    return tuple(found)
