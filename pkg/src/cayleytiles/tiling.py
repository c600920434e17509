"""Tiles, placements, partial tilings, and exact partition checking.

A tile is a finite element set of size at least two; placements are left
translates; a partial tiling is a tile plus an ordered center list whose
placements are pairwise disjoint and include the placement at 1.  Periodic
witnesses certify that a grid tile tiles the whole lattice: the witness
stores period vectors and one fundamental cell of centers, and verification
reduces to an exact-cover check of the quotient torus (each residue class
covered exactly once), which is equivalent to the periodic extension
partitioning the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SpecError
from .groups import (
    IDENTITY,
    element,
    grid_coords,
    is_connected,
    mul,
    sorted_elements,
)


@dataclass(frozen=True)
class Tile:
    """A finite element set with its connectivity cached at construction."""

    cells: frozenset
    connected: bool

    def __len__(self):
        return len(self.cells)


def make_tile(spec, cells) -> Tile:
    cells = frozenset(cells)
    if len(cells) < 2:
        raise SpecError(f"a tile needs at least 2 cells, got {len(cells)}")
    return Tile(cells=cells, connected=is_connected(spec, cells))


def tile_to_json(spec, tile: Tile):
    return {"group": spec.to_json(),
            "cells": [str(g) for g in sorted_elements(spec, tile.cells)]}


def tile_from_json(doc):
    """Load a tile file; returns (spec, tile)."""
    from .groups import GroupSpec
    if not isinstance(doc, dict) or "group" not in doc or "cells" not in doc:
        raise SpecError("tile document needs 'group' and 'cells' fields")
    spec = GroupSpec.from_json(doc["group"])
    cells = [element(spec, s) for s in doc["cells"]]
    if len(set(cells)) != len(cells):
        raise SpecError("duplicate cells in tile document")
    return spec, make_tile(spec, cells)


def placement(spec, c, tile) -> frozenset:
    """Left translate c.F of a tile (or plain cell set)."""
    cells = tile.cells if isinstance(tile, Tile) else tile
    return frozenset(mul(spec, c, f) for f in cells)


class PartialTiling:
    """An ordered center list with pairwise disjoint placements, 1 included."""

    def __init__(self, spec, tile: Tile, centers):
        centers = tuple(centers)
        if IDENTITY not in centers:
            raise SpecError("the identity must be one of the centers")
        if len(set(centers)) != len(centers):
            raise SpecError("duplicate centers")
        covered = set()
        for c in centers:
            cells = placement(spec, c, tile)
            if covered & cells:
                overlap = next(iter(covered & cells))
                raise SpecError(f"placements overlap at {overlap}")
            covered |= cells
        self.tile = tile
        self.centers = centers
        self.covered = frozenset(covered)

    def __eq__(self, other):
        return isinstance(other, PartialTiling) and self.tile == other.tile \
            and self.centers == other.centers

    def __repr__(self):
        return f"PartialTiling(|F|={len(self.tile)}, centers={len(self.centers)})"


def tiling_to_json(spec, tiling: PartialTiling):
    return {"group": spec.to_json(),
            "cells": [str(g) for g in sorted_elements(spec, tiling.tile.cells)],
            "centers": [str(c) for c in tiling.centers]}


def tiling_from_json(doc):
    from .groups import GroupSpec
    if not isinstance(doc, dict) or not {"group", "cells", "centers"} <= set(doc):
        raise SpecError("tiling document needs 'group', 'cells' and 'centers'")
    spec = GroupSpec.from_json(doc["group"])
    tile = make_tile(spec, [element(spec, s) for s in doc["cells"]])
    centers = [element(spec, s) for s in doc["centers"]]
    return spec, PartialTiling(spec, tile, centers)


def disjoint(spec, tiling: PartialTiling, c) -> bool:
    """True iff the placement at c misses every existing placement."""
    return not (placement(spec, c, tiling.tile) & tiling.covered)


def verify_partition(spec, tiling: PartialTiling, region) -> bool:
    """Placements pairwise disjoint and the region fully covered."""
    covered = set()
    for c in tiling.centers:
        for cell in placement(spec, c, tiling.tile):
            if cell in covered:
                return False
            covered.add(cell)
    return all(x in covered for x in region)


# -- periodic witnesses (grid models) ----------------------------------------------


@dataclass(frozen=True)
class PeriodicWitness:
    """Period vectors plus one fundamental cell of centers (grid models)."""

    periods: tuple
    centers: tuple

    def to_json(self):
        return {"periods": [list(v) for v in self.periods],
                "centers": [str(c) for c in self.centers]}

    @classmethod
    def from_json(cls, spec, doc):
        if not isinstance(doc, dict) or not {"periods", "centers"} <= set(doc):
            raise SpecError("witness document needs 'periods' and 'centers'")
        periods = tuple(tuple(int(x) for x in v) for v in doc["periods"])
        centers = tuple(element(spec, s) for s in doc["centers"])
        return cls(periods=periods, centers=centers)


def _ext_gcd(a, b):
    """(g, p, q) with p*a + q*b = g = gcd(a, b), g >= 0."""
    old_r, r = a, b
    old_p, p = 1, 0
    old_q, q = 0, 1
    while r != 0:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_p, p = p, old_p - k * p
        old_q, q = q, old_q - k * q
    if old_r < 0:
        old_r, old_p, old_q = -old_r, -old_p, -old_q
    return old_r, old_p, old_q


def _lattice_tools(spec, periods):
    """Residue map onto a fundamental block for the lattice of the periods.

    Returns (residue, det, block): residue maps any point to its unique
    representative in the block, det is the lattice index, and block lists
    all det representatives.
    """
    dim = spec.dim
    if len(periods) != dim or any(len(v) != dim for v in periods):
        raise SpecError(f"need {dim} period vectors of dimension {dim}")
    if dim == 1:
        (a,) = periods[0]
        if a == 0:
            raise SpecError("zero period")
        a = abs(a)
        return (lambda pt: (pt[0] % a,)), a, [(x,) for x in range(a)]
    if dim == 2:
        (x1, y1), (x2, y2) = periods
        det = x1 * y2 - y1 * x2
        if det == 0:
            raise SpecError("period vectors are linearly dependent")
        g, p, q = _ext_gcd(x1, x2)
        if g == 0:
            # both x-components vanish; swap the roles of the axes
            flip, _, block = _lattice_tools(spec, ((y1, x1), (y2, x2)))
            return (lambda pt: tuple(reversed(flip((pt[1], pt[0]))))), abs(det), \
                [tuple(reversed(pt)) for pt in block]
        a = g
        t = p * y1 + q * y2
        b = abs((x1 // g) * y2 - (x2 // g) * y1)

        def residue(pt):
            x, y = pt
            k1 = x // a
            y_shift = y - k1 * t
            return (x - k1 * a, y_shift % b)

        block = [(i, j) for i in range(a) for j in range(b)]
        return residue, abs(det), block
    raise SpecError("periodic witnesses support grid dimensions 1 and 2 only")


def verify_periodic(spec, tile, witness: PeriodicWitness) -> bool:
    """Exact-cover check for the periodic extension of the witness centers.

    The periodic center set C0 + L partitions the lattice iff the multiset
    {(c + f) mod L : c in C0, f in F} hits every residue class of Z^d / L
    exactly once; a fundamental block is additionally spot-checked by direct
    cover counting.  The witness must allow 1 as a center (some c0 lies in
    the lattice), keeping the Def of a tiling applicable.
    """
    if spec.model != "grid":
        raise SpecError("verify_periodic needs a grid model")
    residue, det, block = _lattice_tools(spec, witness.periods)
    cells = [grid_coords(spec, g) for g in tile.cells]
    centers = [grid_coords(spec, c) for c in witness.centers]
    if not centers:
        return False
    if len({residue(c) for c in centers}) != len(centers):
        return False
    if residue(tuple([0] * spec.dim)) not in {residue(c) for c in centers}:
        return False
    if len(centers) * len(cells) != det:
        return False
    hit = set()
    for c in centers:
        for f in cells:
            r = residue(tuple(ci + fi for ci, fi in zip(c, f)))
            if r in hit:
                return False
            hit.add(r)
    if len(hit) != det:
        return False

    # spot check: one fundamental block, covered exactly once by the
    # placements of all equivalent centers that can reach it
    counts = {pt: 0 for pt in block}
    center_res = {residue(c) for c in centers}
    seen_centers = set()
    for pt in block:
        for f in cells:
            c = tuple(p - fi for p, fi in zip(pt, f))
            if residue(c) in center_res and c not in seen_centers:
                seen_centers.add(c)
                for f2 in cells:
                    q = tuple(ci + fi for ci, fi in zip(c, f2))
                    if q in counts:
                        counts[q] += 1
    return all(v == 1 for v in counts.values())
