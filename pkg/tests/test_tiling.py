"""Tiles, placements, partition checks, periodic witnesses."""

import random

import pytest

from cayleytiles import GroupSpec, IDENTITY, SpecError, element, grid_element, mul
from cayleytiles.tiling import (
    PartialTiling,
    PeriodicWitness,
    Tile,
    disjoint,
    make_tile,
    placement,
    tile_from_json,
    tile_to_json,
    tiling_from_json,
    tiling_to_json,
    verify_partition,
    verify_periodic,
)

GRID1 = GroupSpec.grid(1)
GRID2 = GroupSpec.grid(2)
FREE2 = GroupSpec.free(2)


def gpt(*coords):
    return grid_element(GRID2, coords)


def domino():
    return make_tile(GRID2, [gpt(0, 0), gpt(1, 0)])


def ring_octomino():
    cells = [gpt(x, y) for x in range(3) for y in range(3) if (x, y) != (1, 1)]
    return make_tile(GRID2, cells)


# -- tiles ------------------------------------------------------------------------

def test_tile_needs_two_cells():
    with pytest.raises(SpecError):
        make_tile(GRID2, [gpt(0, 0)])


def test_tile_connectivity_cached():
    assert domino().connected
    assert not make_tile(GRID2, [gpt(0, 0), gpt(1, 1)]).connected
    assert ring_octomino().connected


def test_tile_json_roundtrip():
    spec, tile = tile_from_json(tile_to_json(GRID2, ring_octomino()))
    assert spec == GRID2
    assert tile.cells == ring_octomino().cells
    with pytest.raises(SpecError):
        tile_from_json({"group": GRID2.to_json(), "cells": ["", "a", "a"]})


# -- placements --------------------------------------------------------------------

def test_placement_examples():
    vertical = make_tile(GRID2, [gpt(0, 0), gpt(0, 1)])
    assert placement(GRID2, gpt(1, 0), vertical) == {gpt(1, 0), gpt(1, 1)}
    assert placement(GRID2, IDENTITY, vertical) == vertical.cells
    f = make_tile(FREE2, [IDENTITY, element(FREE2, "b")])
    assert placement(FREE2, element(FREE2, "a"), f) == \
        {element(FREE2, "a"), element(FREE2, "ab")}


def test_placement_left_equivariant():
    rng = random.Random(31)
    tile = ring_octomino()
    for _ in range(30):
        c = gpt(rng.randrange(-4, 5), rng.randrange(-4, 5))
        g = gpt(rng.randrange(-4, 5), rng.randrange(-4, 5))
        lhs = placement(GRID2, mul(GRID2, g, c), tile)
        rhs = {mul(GRID2, g, x) for x in placement(GRID2, c, tile)}
        assert lhs == rhs


# -- partial tilings ------------------------------------------------------------------

def test_partial_tiling_requires_identity_center():
    with pytest.raises(SpecError):
        PartialTiling(GRID2, domino(), [gpt(2, 0)])


def test_partial_tiling_rejects_overlap():
    with pytest.raises(SpecError):
        PartialTiling(GRID2, domino(), [IDENTITY, gpt(1, 0)])


def test_disjoint_examples():
    t = PartialTiling(GRID2, domino(), [IDENTITY])
    assert disjoint(GRID2, t, gpt(2, 0))
    assert not disjoint(GRID2, t, gpt(1, 0))
    assert not disjoint(GRID2, t, gpt(0, 0))


def test_verify_partition_brick_rows():
    centers = [gpt(2 * i, j) for i in range(5) for j in range(10)]
    tiling = PartialTiling(GRID2, domino(), centers)
    region = [gpt(x, y) for x in range(10) for y in range(10)]
    assert verify_partition(GRID2, tiling, region)
    # dropping one center leaves uncovered cells
    smaller = PartialTiling(GRID2, domino(), centers[:-1])
    assert not verify_partition(GRID2, smaller, region)


def test_verify_partition_overlap_on_line():
    f = make_tile(GRID1, [grid_element(GRID1, (0,)), grid_element(GRID1, (1,))])
    with pytest.raises(SpecError):
        PartialTiling(GRID1, f, [IDENTITY, grid_element(GRID1, (1,))])


def test_verify_partition_monotone_in_region():
    centers = [gpt(2 * i, j) for i in range(3) for j in range(4)]
    tiling = PartialTiling(GRID2, domino(), centers)
    big = [gpt(x, y) for x in range(6) for y in range(4)]
    small = [gpt(x, y) for x in range(3) for y in range(2)]
    assert verify_partition(GRID2, tiling, big)
    assert verify_partition(GRID2, tiling, small)


def test_tiling_json_roundtrip():
    centers = [gpt(2 * i, j) for i in range(2) for j in range(2)]
    tiling = PartialTiling(GRID2, domino(), centers)
    spec, again = tiling_from_json(tiling_to_json(GRID2, tiling))
    assert spec == GRID2
    assert again.centers == tiling.centers
    assert again.tile.cells == tiling.tile.cells


# -- periodic witnesses ----------------------------------------------------------------

def test_domino_periodic_witness():
    w = PeriodicWitness(periods=((2, 0), (0, 1)), centers=(IDENTITY,))
    assert verify_periodic(GRID2, domino(), w)


def test_tromino_periodic_witness():
    tromino = make_tile(GRID2, [gpt(0, 0), gpt(1, 0), gpt(2, 0)])
    w = PeriodicWitness(periods=((3, 0), (0, 1)), centers=(IDENTITY,))
    assert verify_periodic(GRID2, tromino, w)
    # wrong periods fail
    bad = PeriodicWitness(periods=((2, 0), (0, 1)), centers=(IDENTITY,))
    assert not verify_periodic(GRID2, tromino, bad)


def test_lshape_staircase_witness():
    # the L tromino tiles by translations along the lattice (3,0),(1,1):
    # centers are exactly {x + 2y = 0 mod 3}, each point p is covered by
    # exactly one of p, p-(1,0), p-(0,1)
    tile = make_tile(GRID2, [gpt(0, 0), gpt(1, 0), gpt(0, 1)])
    stair = PeriodicWitness(periods=((3, 0), (1, 1)), centers=(IDENTITY,))
    assert verify_periodic(GRID2, tile, stair)
    # two translated Ls cannot fill a 3x2 box: the wrapped second copy collides
    box_pair = PeriodicWitness(periods=((3, 0), (0, 2)),
                               centers=(IDENTITY, gpt(2, 1)))
    assert not verify_periodic(GRID2, tile, box_pair)


def test_ring_octomino_has_no_small_periodic_witness():
    tile = ring_octomino()
    found = False
    for d1 in range(1, 9):
        for d2 in range(1, 9):
            for s in range(d1):
                if d1 * d2 % len(tile.cells) != 0:
                    continue
                # single-center witnesses only (|C0| = det / 8)
                if d1 * d2 != len(tile.cells):
                    continue
                w = PeriodicWitness(periods=((d1, 0), (s, d2)), centers=(IDENTITY,))
                if verify_periodic(GRID2, tile, w):
                    found = True
    assert not found


def test_periodic_witness_line():
    f = make_tile(GRID1, [grid_element(GRID1, (0,)), grid_element(GRID1, (1,)),
                          grid_element(GRID1, (2,))])
    assert verify_periodic(GRID1, f, PeriodicWitness(periods=((3,),),
                                                     centers=(IDENTITY,)))
    assert not verify_periodic(GRID1, f, PeriodicWitness(periods=((4,),),
                                                         centers=(IDENTITY,)))


def test_periodic_witness_requires_grid():
    f = make_tile(FREE2, [IDENTITY, element(FREE2, "a")])
    with pytest.raises(SpecError):
        verify_periodic(FREE2, f, PeriodicWitness(periods=((2, 0), (0, 1)),
                                                  centers=(IDENTITY,)))


def test_periodic_witness_degenerate_periods():
    with pytest.raises(SpecError):
        verify_periodic(GRID2, domino(),
                        PeriodicWitness(periods=((2, 0), (4, 0)), centers=(IDENTITY,)))


def test_periodic_witness_json_roundtrip():
    w = PeriodicWitness(periods=((2, 0), (0, 1)), centers=(IDENTITY,))
    again = PeriodicWitness.from_json(GRID2, w.to_json())
    assert again == w
