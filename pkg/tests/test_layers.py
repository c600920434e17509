"""Frontier and layer-decomposition tests with an independent ownership oracle."""

import random

import pytest

from cayleytiles import (
    GroupSpec,
    IDENTITY,
    PartialTiling,
    SpecError,
    ball,
    decompose_layers,
    frontier,
    grid_element,
    make_tile,
    mul,
    neighbors,
    placement,
)

GRID1 = GroupSpec.grid(1)
GRID2 = GroupSpec.grid(2)
FREE2 = GroupSpec.free(2)


def gpt(*coords):
    return grid_element(GRID2 if len(coords) == 2 else GRID1, coords)


def layer_oracle(spec, tiling):
    """Layers recomputed from the definition via placement intersections.

    A center joins layer n exactly when its placement meets the frontier of
    the previous layers' region; the decomposition stops at the first
    frontier point no placement covers.  Disjointness makes both readings
    (ownership and intersection) pick the same centers.
    """
    places = {c: placement(spec, c, tiling.tile) for c in tiling.centers}
    covered = set()
    for cells in places.values():
        covered |= cells
    region = set(places[IDENTITY])
    layers = [{IDENTITY}]
    used = {IDENTITY}
    while True:
        fr = set()
        for cell in region:
            for nb in neighbors(spec, cell):
                if nb not in region:
                    fr.add(nb)
        if not fr <= covered:
            break
        new = {c for c, cells in places.items()
               if c not in used and cells & fr}
        if not new:
            break
        layers.append(new)
        used |= new
        for c in new:
            region |= places[c]
    return layers


def random_partial_tiling(spec, tile, seed, radius=7, rounds=40):
    rng = random.Random(seed)
    centers = [IDENTITY]
    covered = set(placement(spec, IDENTITY, tile))
    candidates = list(ball(spec, IDENTITY, radius))
    rng.shuffle(candidates)
    for c in candidates:
        if len(centers) >= rounds:
            break
        cells = placement(spec, c, tile)
        if not cells & covered:
            centers.append(c)
            covered |= cells
    return PartialTiling(spec, tile, tuple(centers))


def test_frontier_pair_in_z():
    covered = {gpt(0), gpt(1)}
    assert frontier(GRID1, covered) == {gpt(-1), gpt(2)}


def test_frontier_domino_grid2():
    covered = {gpt(0, 0), gpt(1, 0)}
    got = frontier(GRID2, covered)
    assert len(got) == 6
    assert got == {gpt(-1, 0), gpt(2, 0), gpt(0, 1), gpt(1, 1),
                   gpt(0, -1), gpt(1, -1)}


def test_frontier_identity_free2():
    got = frontier(FREE2, {IDENTITY})
    assert len(got) == 4
    assert all(len(g.word) == 1 for g in got)


def test_frontier_empty_raises():
    with pytest.raises(SpecError):
        frontier(GRID2, set())


def test_decompose_two_full_rings_in_z():
    tile = make_tile(GRID1, [gpt(0), gpt(1)])
    centers = tuple(gpt(k) for k in (0, -2, 2, -4, 4))
    decomp = decompose_layers(GRID1, PartialTiling(GRID1, tile, centers))
    assert decomp.depth() == 2
    assert set(decomp.layers[0]) == {IDENTITY}
    assert set(decomp.layers[1]) == {gpt(-2), gpt(2)}
    assert set(decomp.layers[2]) == {gpt(-4), gpt(4)}


def test_decompose_stops_at_unowned_point():
    tile = make_tile(GRID1, [gpt(0), gpt(1)])
    centers = (IDENTITY, gpt(2))
    decomp = decompose_layers(GRID1, PartialTiling(GRID1, tile, centers))
    assert decomp.depth() == 0
    assert decomp.layers == ((IDENTITY,),)


def test_decompose_brick_pattern_two_layers():
    tile = make_tile(GRID2, [gpt(0, 0), gpt(1, 0)])
    centers = [gpt(2 * i + (j % 2), j)
               for j in range(-5, 6) for i in range(-6, 6)]
    assert IDENTITY in centers
    centers.remove(IDENTITY)
    tiling = PartialTiling(GRID2, tile, (IDENTITY, *centers))
    decomp = decompose_layers(GRID2, tiling)
    assert decomp.depth() >= 2
    oracle = layer_oracle(GRID2, tiling)
    assert [set(layer) for layer in decomp.layers] == oracle


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("spec,cells", [
    (GRID2, ("", "a")),
    (GRID2, ("", "a", "b")),
    (FREE2, ("", "a")),
])
def test_decompose_matches_oracle_on_random_fixtures(spec, cells, seed):
    from cayleytiles import element
    tile = make_tile(spec, [element(spec, s) for s in cells])
    tiling = random_partial_tiling(spec, tile, seed)
    decomp = decompose_layers(spec, tiling)
    assert [set(layer) for layer in decomp.layers] == layer_oracle(spec, tiling)
    seen = set()
    for layer in decomp.layers:
        assert not (set(layer) & seen)
        seen |= set(layer)


@pytest.mark.parametrize("seed", range(6))
def test_decompose_invariant_under_center_permutation(seed):
    tile = make_tile(GRID2, [gpt(0, 0), gpt(1, 0), gpt(2, 0)])
    tiling = random_partial_tiling(GRID2, tile, seed)
    base = decompose_layers(GRID2, tiling)
    rng = random.Random(seed + 1000)
    others = [c for c in tiling.centers if c != IDENTITY]
    for _ in range(4):
        rng.shuffle(others)
        shuffled = PartialTiling(GRID2, tile, (IDENTITY, *others))
        assert decompose_layers(GRID2, shuffled).layers == base.layers


def test_decompose_isolated_tile_has_zero_depth():
    tile = make_tile(GRID2, [gpt(0, 0), gpt(1, 0)])
    decomp = decompose_layers(GRID2, PartialTiling(GRID2, tile, (IDENTITY,)))
    assert decomp.depth() == 0
    assert decomp.to_json() == [[""]]
