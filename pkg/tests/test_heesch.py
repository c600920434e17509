"""Search-engine tests with an independent brute-force surroundability oracle."""

import pytest

from cayleytiles import (
    Exhausted,
    GroupSpec,
    IDENTITY,
    ResourceCapError,
    SpecError,
    certificate_bytes,
    certificate_from_json,
    certificate_to_json,
    containment_radius,
    decompose_layers,
    element,
    find_periodic_witness,
    grid_element,
    heesch_eval,
    heesch_ge,
    make_tile,
    verify_certificate,
    verify_periodic,
)

GRID1 = GroupSpec.grid(1)
GRID2 = GroupSpec.grid(2)
FREE2 = GroupSpec.free(2)

DOMINO = [(0, 0), (1, 0)]
TROMINO_I = [(0, 0), (1, 0), (2, 0)]
TROMINO_L = [(0, 0), (1, 0), (0, 1)]
SQUARE = [(0, 0), (1, 0), (0, 1), (1, 1)]
RING8 = [(x, y) for x in range(3) for y in range(3) if (x, y) != (1, 1)]
TET_S = [(0, 0), (1, 0), (1, 1), (2, 1)]
TET_T = [(0, 0), (1, 0), (2, 0), (1, 1)]
PENT_U = [(0, 0), (2, 0), (0, 1), (1, 1), (2, 1)]
PENT_X = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)]


def grid_tile(coords):
    return make_tile(GRID2, [grid_element(GRID2, c) for c in coords])


# -- independent oracle -------------------------------------------------------------


def naive_radius(cells, n):
    diam = max(abs(ax - bx) + abs(ay - by)
               for ax, ay in cells for bx, by in cells)
    far = max(abs(x) + abs(y) for x, y in cells)
    return (n + 1) * (diam + 1) + far


def naive_layers_achievable(cells, n):
    """Row-major brute force over placements, kept independent of the engine."""
    tile = [tuple(c) for c in cells]
    r0 = naive_radius(tile, n)

    def pl(c):
        return [(c[0] + fx, c[1] + fy) for fx, fy in tile]

    def fr(region):
        out = set()
        for x, y in region:
            for q in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if q not in region:
                    out.add(q)
        return sorted(out, key=lambda p: (p[1], p[0]))

    def go(covered, todo, layer):
        todo = [p for p in todo if p not in covered]
        if not todo:
            if layer == n:
                return True
            return go(covered, fr(covered), layer + 1)
        x = todo[0]
        for f in tile:
            cand = pl((x[0] - f[0], x[1] - f[1]))
            if all(abs(qx) + abs(qy) <= r0 and (qx, qy) not in covered
                   for qx, qy in cand):
                if go(covered | set(cand), todo[1:], layer):
                    return True
        return False

    start = set(pl((0, 0)))
    return go(start, fr(start), 1)


# -- layer search -------------------------------------------------------------------


def test_domino_achieves_three_layers():
    cert = heesch_ge(GRID2, grid_tile(DOMINO), 3)
    assert cert.verdict == {"kind": "at_least", "n": 3}
    assert verify_certificate(GRID2, cert)
    assert len(cert.layers) - 1 >= 3
    assert cert.containment_radius == 4 * 2 + 1


def test_i_tromino_layers_in_z():
    tile = make_tile(GRID1, [element(GRID1, w) for w in ("", "a", "aa")])
    cert = heesch_ge(GRID1, tile, 2)
    assert verify_certificate(GRID1, cert)
    pt = lambda k: grid_element(GRID1, (k,))
    assert set(cert.layers[1]) == {pt(-3), pt(3)}
    assert set(cert.layers[2]) == {pt(-6), pt(6)}


def test_ring_octomino_refuted_at_one_layer():
    got = heesch_ge(GRID2, grid_tile(RING8), 1)
    assert isinstance(got, Exhausted)
    assert got.conclusive
    assert got.containment_radius == 2 * 5 + 4
    assert not naive_layers_achievable(RING8, 1)


def test_monotone_in_layer_target():
    tile = grid_tile(DOMINO)
    assert not isinstance(heesch_ge(GRID2, tile, 3), Exhausted)
    assert not isinstance(heesch_ge(GRID2, tile, 2), Exhausted)
    assert not isinstance(heesch_ge(GRID2, tile, 1), Exhausted)


def test_translation_does_not_change_verdicts():
    moved = [(x + 5, y - 3) for x, y in RING8]
    got = heesch_ge(GRID2, grid_tile(moved), 1)
    assert isinstance(got, Exhausted) and got.conclusive
    cert = heesch_eval(GRID2, grid_tile([(x + 4, y + 9) for x, y in DOMINO]))
    assert cert.verdict == {"kind": "tiles_periodic"}


def test_radius_cap_flags_nonconclusive():
    got = heesch_ge(GRID2, grid_tile(RING8), 1, radius_cap=3)
    assert isinstance(got, Exhausted)
    assert not got.conclusive
    cert = heesch_eval(GRID2, grid_tile(RING8), radius_cap=3, period_bound=0)
    assert cert.verdict == {"kind": "at_least", "n": 0}


def test_node_budget_is_enforced():
    with pytest.raises(ResourceCapError):
        heesch_ge(GRID2, grid_tile(DOMINO), 3, max_nodes=5)


def test_layer_target_must_be_positive():
    with pytest.raises(SpecError):
        heesch_ge(GRID2, grid_tile(DOMINO), 0)


def test_parallel_mode_returns_valid_certificate():
    cert = heesch_ge(GRID2, grid_tile(DOMINO), 2, deterministic=False,
                     threads=4)
    assert verify_certificate(GRID2, cert)
    assert cert.verdict == {"kind": "at_least", "n": 2}


@pytest.mark.parametrize("cells", [TET_S, TET_T, PENT_U, PENT_X,
                                   TROMINO_L, RING8])
def test_engine_agrees_with_naive_oracle_one_layer(cells):
    got = heesch_ge(GRID2, grid_tile(cells), 1)
    assert (not isinstance(got, Exhausted)) == naive_layers_achievable(cells, 1)


# -- evaluation and periodic search -------------------------------------------------


def test_domino_tiles_periodically():
    cert = heesch_eval(GRID2, grid_tile(DOMINO))
    assert cert.verdict == {"kind": "tiles_periodic"}
    assert cert.witness.periods == ((2, 0), (0, 1))
    assert cert.witness.centers == (IDENTITY,)
    assert verify_certificate(GRID2, cert)


def test_i_tromino_tiles_periodically():
    cert = heesch_eval(GRID2, grid_tile(TROMINO_I))
    assert cert.verdict == {"kind": "tiles_periodic"}
    assert cert.witness.periods == ((3, 0), (0, 1))
    assert verify_periodic(GRID2, grid_tile(TROMINO_I), cert.witness)


def test_l_tromino_tiles_via_sheared_lattice():
    cert = heesch_eval(GRID2, grid_tile(TROMINO_L))
    assert cert.verdict == {"kind": "tiles_periodic"}
    assert cert.witness.periods == ((3, 0), (1, 1))
    assert cert.witness.centers == (IDENTITY,)


def test_square_tetromino_tiles_periodically():
    cert = heesch_eval(GRID2, grid_tile(SQUARE))
    assert cert.verdict == {"kind": "tiles_periodic"}
    assert cert.witness.periods == ((2, 0), (0, 2))


def test_domino_in_z_tiles_periodically():
    tile = make_tile(GRID1, [element(GRID1, ""), element(GRID1, "a")])
    cert = heesch_eval(GRID1, tile)
    assert cert.verdict == {"kind": "tiles_periodic"}
    assert cert.witness.periods == ((2,),)


def test_ring_octomino_heesch_number_is_zero():
    cert = heesch_eval(GRID2, grid_tile(RING8))
    assert cert.verdict["kind"] == "exactly_within_radius"
    assert cert.verdict["n"] == 0
    assert verify_certificate(GRID2, cert)


def test_eval_exhausts_layer_budget():
    cert = heesch_eval(GRID2, grid_tile(DOMINO), max_layers=2, period_bound=0)
    assert cert.verdict == {"kind": "at_least", "n": 2}
    assert verify_certificate(GRID2, cert)


def test_free_group_tile_gets_a_verified_verdict():
    tile = make_tile(FREE2, [element(FREE2, w) for w in ("", "a", "b")])
    cert = heesch_eval(FREE2, tile, max_layers=1)
    assert cert.verdict["kind"] in ("at_least", "exactly_within_radius")
    assert verify_certificate(FREE2, cert)
    again = heesch_eval(FREE2, tile, max_layers=1)
    assert certificate_bytes(cert) == certificate_bytes(again)


def test_no_witness_search_outside_grids():
    tile = make_tile(FREE2, [element(FREE2, w) for w in ("", "a")])
    assert find_periodic_witness(FREE2, tile) is None


def test_sequential_certificates_are_byte_stable():
    tile = grid_tile(TROMINO_L)
    runs = [certificate_bytes(heesch_eval(GRID2, tile)) for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]
    runs = [certificate_bytes(heesch_ge(GRID2, tile, 2)) for _ in range(2)]
    assert runs[0] == runs[1]


# -- certificates -------------------------------------------------------------------


def test_certificate_json_round_trip():
    cert = heesch_ge(GRID2, grid_tile(DOMINO), 2)
    doc = certificate_to_json(cert)
    back = certificate_from_json(doc)
    assert verify_certificate(GRID2, back)
    assert certificate_bytes(back) == certificate_bytes(cert)


def rejected(doc):
    try:
        return not verify_certificate(GRID2, doc)
    except SpecError:
        return True


def mutate(doc, path, value):
    import copy
    out = copy.deepcopy(doc)
    target = out
    for step in path[:-1]:
        target = target[step]
    target[path[-1]] = value
    return out


def test_single_field_mutations_are_rejected():
    doc = certificate_to_json(heesch_ge(GRID2, grid_tile(DOMINO), 2))
    assert verify_certificate(GRID2, doc)
    assert rejected(mutate(doc, ["format"], "bogus/9"))
    assert rejected(mutate(doc, ["group_digest"], "0" * 16))
    assert rejected(mutate(doc, ["tile"], doc["tile"][:1]))
    assert rejected(mutate(doc, ["tile"], doc["tile"] + ["bb"]))
    assert rejected(mutate(doc, ["verdict", "n"], doc["verdict"]["n"] + 1))
    assert rejected(mutate(doc, ["centers"], doc["centers"][1:]))
    assert rejected(mutate(doc, ["centers"],
                           [c for c in doc["centers"] if c != ""]))
    assert rejected(mutate(doc, ["layers"], doc["layers"][:-1]))
    assert rejected(mutate(doc, ["connected"], False))


def test_exact_verdict_mutations_are_rejected():
    doc = certificate_to_json(heesch_eval(GRID2, grid_tile(RING8)))
    assert verify_certificate(GRID2, doc)
    assert rejected(mutate(doc, ["verdict", "n"], 1))
    assert rejected(mutate(doc, ["verdict", "radius"], 1))
    assert rejected(mutate(doc, ["radius"], 1))


def test_periodic_witness_mutations_are_rejected():
    doc = certificate_to_json(heesch_eval(GRID2, grid_tile(DOMINO)))
    assert verify_certificate(GRID2, doc)
    assert rejected(mutate(doc, ["witness", "periods"], [[5, 0], [0, 1]]))
    assert rejected(mutate(doc, ["witness", "centers"], ["", "a"]))


def test_wrong_group_is_rejected():
    cert = heesch_ge(GRID2, grid_tile(DOMINO), 1)
    assert not verify_certificate(GroupSpec.grid(3), cert)


def test_decomposition_in_certificate_matches_recount():
    cert = heesch_ge(GRID2, grid_tile(TROMINO_L), 2)
    from cayleytiles import PartialTiling
    tiling = PartialTiling(GRID2, grid_tile(TROMINO_L), cert.centers)
    assert decompose_layers(GRID2, tiling).layers == cert.layers


def test_containment_radius_formula():
    assert containment_radius(GRID2, grid_tile(DOMINO), 1) == 2 * 2 + 1
    assert containment_radius(GRID2, grid_tile(RING8), 1) == 2 * 5 + 4
    tile = make_tile(FREE2, [element(FREE2, w) for w in ("", "a", "b")])
    assert containment_radius(FREE2, tile, 1) == 2 * 3 + 1
