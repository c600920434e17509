"""Coset tables, Schreier machinery, kernel search, and the verifiers."""

import random

import pytest

from cayleytiles import (
    GroupSpec,
    IDENTITY,
    ResourceCapError,
    SpecError,
    element,
    inverse,
    length,
    mul,
    normal_form,
    shortlex_key,
)
from cayleytiles.subgroups import (
    CosetTable,
    FiniteHom,
    SchreierBasis,
    basis_word_element,
    build_coset_table,
    check_c2,
    check_closure_invariance,
    injectivity_radius,
    kernel_contains,
    min_kernel_element,
    schreier_generators,
    schreier_rewrite,
)

FREE2 = GroupSpec.free(2)
FREE3 = GroupSpec.free(3)
GRID2 = GroupSpec.grid(2)


def hom_free2_z2():
    # a swaps the two cosets, b acts trivially
    return FiniteHom(FREE2, 2, {"a": [1, 0], "b": [0, 1]})


def hom_free2_klein4():
    # regular action of Z_2 x Z_2 on points e, x, y, xy
    return FiniteHom(FREE2, 4, {"a": [1, 0, 3, 2], "b": [2, 3, 0, 1]})


def hom_grid2_z3z3():
    # coordinates mod 3, point p = x + 3y
    a = [p - 2 if p % 3 == 2 else p + 1 for p in range(9)]
    b = [(p + 3) % 9 for p in range(9)]
    return FiniteHom(GRID2, 9, {"a": a, "b": b})


def cyclic_perm(q):
    return [(i + 1) % q for i in range(q)]


# -- FiniteHom validation ----------------------------------------------------------

def test_hom_rejects_non_permutation():
    with pytest.raises(SpecError):
        FiniteHom(FREE2, 2, {"a": [0, 0], "b": [0, 1]})
    with pytest.raises(SpecError):
        FiniteHom(FREE2, 2, {"a": [1, 0]})


def test_hom_rejects_relation_violation():
    # images of a and b must commute for a grid domain
    with pytest.raises(SpecError):
        FiniteHom(GRID2, 3, {"a": [1, 0, 2], "b": [0, 2, 1]})


def test_hom_rejects_non_transitive():
    with pytest.raises(SpecError):
        FiniteHom(FREE2, 2, {"a": [0, 1], "b": [0, 1]})


def test_hom_rejects_non_regular():
    # transitive on 3 points but the group is all of S_3
    with pytest.raises(SpecError):
        FiniteHom(FREE2, 3, {"a": [1, 0, 2], "b": [0, 2, 1]})


def test_hom_rejects_bad_involution_image():
    spec = GroupSpec.free_product_cyclic([2, 2])
    with pytest.raises(SpecError):
        FiniteHom(spec, 3, {"a": cyclic_perm(3), "b": [0, 2, 1]})


def test_hom_order_relation_checked():
    spec = GroupSpec.free_product_cyclic([3, 3])
    # a must have order dividing 3; a transposition does not
    with pytest.raises(SpecError):
        FiniteHom(spec, 3, {"a": [1, 0, 2], "b": cyclic_perm(3)})
    FiniteHom(spec, 3, {"a": cyclic_perm(3), "b": cyclic_perm(3)})


def test_hom_json_roundtrip():
    hom = hom_free2_klein4()
    again = FiniteHom.from_json(FREE2, hom.to_json())
    assert again.to_json() == hom.to_json()


# -- coset tables and transversals ----------------------------------------------------

def test_transversal_free2_z2():
    table = build_coset_table(hom_free2_z2())
    assert [str(t) for t in table.transversal] == ["", "a"]


def test_transversal_free2_klein4():
    table = build_coset_table(hom_free2_klein4())
    assert [str(t) for t in table.transversal] == ["", "a", "b", "ab"]


def test_grid2_z3z3_has_9_cosets():
    table = build_coset_table(hom_grid2_z3z3())
    assert table.degree == 9
    assert len(set(table.transversal)) == 9


def bfs_transversal_oracle(spec, hom):
    """Independent transversal: plain FIFO breadth-first over raw words."""
    out = {0: ()}
    queue = [(0, ())]
    while queue:
        p, w = queue.pop(0)
        for s in spec.symbols:
            q = hom.symbol_perm[s][p]
            if q not in out:
                out[q] = w + (s,)
                queue.append((q, w + (s,)))
    return out


@pytest.mark.parametrize("make", [hom_free2_z2, hom_free2_klein4, hom_grid2_z3z3])
def test_transversal_matches_bfs_oracle_and_is_prefix_closed(make):
    hom = make()
    table = build_coset_table(hom)
    oracle = bfs_transversal_oracle(hom.domain, hom)
    words = {t.word for t in table.transversal}
    for p, w in oracle.items():
        assert table.transversal[p].word == w
        # shortest-word property: same length as the oracle's BFS word
        assert len(table.transversal[p].word) == len(w)
    for t in table.transversal:
        for i in range(len(t.word)):
            assert t.word[:i] in words, "transversal is not prefix-closed"
        # transversal words are canonical normal forms
        assert normal_form(hom.domain, t.word) == t


# -- kernel membership ------------------------------------------------------------------

def test_kernel_contains_examples():
    table = build_coset_table(hom_free2_z2())
    assert kernel_contains(table, element(FREE2, "aa"))
    assert not kernel_contains(table, element(FREE2, "a"))
    assert kernel_contains(table, element(FREE2, "baab'"))


# -- Schreier generators -------------------------------------------------------------------

def test_schreier_generators_free2_z2():
    table = build_coset_table(hom_free2_z2())
    basis = schreier_generators(table)
    assert {str(g) for g in basis.generators} == {"b", "aa", "aba'"}
    assert len(basis.generators) == 1 + 2 * (2 - 1)


def test_schreier_generators_free2_klein4():
    table = build_coset_table(hom_free2_klein4())
    basis = schreier_generators(table)
    assert len(basis.generators) == 1 + 4 * (2 - 1)
    for g in basis.generators:
        assert kernel_contains(table, g)


def test_schreier_generators_free3_trivial_target():
    hom = FiniteHom(FREE3, 1, {"a": [0], "b": [0], "c": [0]})
    basis = schreier_generators(build_coset_table(hom))
    assert {str(g) for g in basis.generators} == {"a", "b", "c"}


def test_nielsen_schreier_counts():
    fixtures = []
    for q in range(2, 9):
        fixtures.append((FREE2, FiniteHom(FREE2, q, {"a": cyclic_perm(q),
                                                     "b": list(range(q))})))
        fixtures.append((FREE3, FiniteHom(FREE3, q, {"a": cyclic_perm(q),
                                                     "b": list(range(q)),
                                                     "c": list(range(q))})))
    fixtures.append((FREE2, hom_free2_klein4()))
    for spec, hom in fixtures:
        basis = schreier_generators(build_coset_table(hom))
        k = spec.rank
        assert len(basis.generators) == 1 + hom.degree * (k - 1)
        for g in basis.generators:
            assert kernel_contains(build_coset_table(hom), g)


def free_reduce_letters(letters):
    out = []
    for lt in letters:
        if out and out[-1] == -lt:
            out.pop()
        else:
            out.append(lt)
    return tuple(out)


@pytest.mark.parametrize("make", [hom_free2_z2, hom_free2_klein4])
def test_schreier_rewrite_roundtrip(make):
    hom = make()
    table = build_coset_table(hom)
    basis = schreier_generators(table)
    rng = random.Random(21)
    k = len(basis.generators)
    for _ in range(300):
        letters = []
        for _ in range(rng.randrange(9)):
            lt = rng.choice([i for i in range(-k, k + 1) if i != 0])
            letters.append(lt)
        reduced = free_reduce_letters(letters)
        g = basis_word_element(FREE2, basis, letters)
        assert schreier_rewrite(table, basis, g) == reduced


def test_schreier_rewrite_rejects_non_kernel():
    table = build_coset_table(hom_free2_z2())
    basis = schreier_generators(table)
    with pytest.raises(SpecError):
        schreier_rewrite(table, basis, element(FREE2, "a"))


# -- minimal kernel elements ------------------------------------------------------------

def test_min_kernel_element_free2_klein4():
    table = build_coset_table(hom_free2_klein4())
    assert str(min_kernel_element(FREE2, table, cap=4)) == "aa"


def test_min_kernel_element_grid2_z3z3():
    table = build_coset_table(hom_grid2_z3z3())
    g = min_kernel_element(GRID2, table, cap=5)
    assert str(g) == "aaa"
    assert length(GRID2, g) == 3


def test_min_kernel_element_trivial_kernel():
    spec = GroupSpec.free_product_cyclic([3])
    hom = FiniteHom(spec, 3, {"a": cyclic_perm(3)})
    table = build_coset_table(hom)
    with pytest.raises(SpecError, match="trivial kernel"):
        min_kernel_element(spec, table, cap=10)


def test_min_kernel_element_cap_exhausted():
    table = build_coset_table(hom_grid2_z3z3())
    with pytest.raises(ResourceCapError):
        min_kernel_element(GRID2, table, cap=2)


def bfs_min_kernel_oracle(spec, table, cap):
    """Independent oracle: exhaustive scan of the ball in shortlex order."""
    from cayleytiles import ball
    best = None
    for g in ball(spec, IDENTITY, cap):
        if g != IDENTITY and kernel_contains(table, g):
            if best is None or shortlex_key(spec, g) < shortlex_key(spec, best):
                best = g
    return best


def test_min_kernel_matches_oracle():
    for make, spec, cap in [(hom_free2_z2, FREE2, 3),
                            (hom_free2_klein4, FREE2, 3),
                            (hom_grid2_z3z3, GRID2, 4)]:
        table = build_coset_table(make())
        assert min_kernel_element(spec, table, cap) == \
            bfs_min_kernel_oracle(spec, table, cap)


def test_min_kernel_monotone_under_enlargement():
    # kernel of Z_4 marking contains kernel of Z_8 marking: min length shrinks or stays
    t8 = build_coset_table(FiniteHom(FREE2, 8, {"a": cyclic_perm(8), "b": list(range(8))}))
    t4 = build_coset_table(FiniteHom(FREE2, 4, {"a": cyclic_perm(4), "b": list(range(4))}))
    m8 = min_kernel_element(FREE2, t8, cap=2)
    m4 = min_kernel_element(FREE2, t4, cap=2)
    assert length(FREE2, m4) <= length(FREE2, m8)


# -- check_c2 ---------------------------------------------------------------------------

def test_check_c2_true_on_schreier_basis():
    table = build_coset_table(hom_free2_z2())
    basis = schreier_generators(table)
    assert check_c2(FREE2, table, basis) is True


def test_check_c2_false_on_padded_basis():
    table = build_coset_table(hom_free2_z2())
    padded = SchreierBasis(generators=(element(FREE2, "baa"), element(FREE2, "aa"),
                                       element(FREE2, "aba'")),
                           edge_letter={})
    assert check_c2(FREE2, table, padded) is False


def test_check_c2_index_one():
    hom = FiniteHom(FREE2, 1, {"a": [0], "b": [0]})
    table = build_coset_table(hom)
    basis = schreier_generators(table)
    assert {str(g) for g in basis.generators} == {"a", "b"}
    assert check_c2(FREE2, table, basis) is True


# -- closure invariance -------------------------------------------------------------------

def test_closure_invariance_full_set():
    table = build_coset_table(hom_free2_z2())
    basis = schreier_generators(table)
    for m in (2, 3, 4):
        assert check_closure_invariance(FREE2, table, basis, m) is True


def test_closure_invariance_index_one():
    hom = FiniteHom(FREE2, 1, {"a": [0], "b": [0]})
    table = build_coset_table(hom)
    basis = schreier_generators(table)
    assert check_closure_invariance(FREE2, table, basis, 2) is True


def test_closure_invariance_asymmetric_probe_fails():
    # S = {b^2} alone: a b^2 a^-1 = (aba')^2 is not in the closure of b^2
    # inside the kernel, because the letter for aba' keeps infinite order
    table = build_coset_table(hom_free2_z2())
    basis = schreier_generators(table)
    b_idx = [i for i, g in enumerate(basis.generators) if str(g) == "b"][0]
    assert check_closure_invariance(FREE2, table, basis, 2, subset=[b_idx]) is False


def test_closure_invariance_rejects_non_free_domain():
    spec = GroupSpec.free_product_cyclic([3, 3])
    hom = FiniteHom(spec, 3, {"a": cyclic_perm(3), "b": cyclic_perm(3)})
    table = build_coset_table(hom)
    with pytest.raises(SpecError):
        check_closure_invariance(spec, table, SchreierBasis((), {}), 2)


# -- injectivity radius --------------------------------------------------------------------

def test_injectivity_radius_cyclic():
    for m, expected in [(5, 2), (6, 2), (7, 3), (9, 4)]:
        r = injectivity_radius(GroupSpec.free(1),
                               GroupSpec.free_product_cyclic([m]), cap=10)
        assert r.exact and r.radius == expected, (m, r)


def test_injectivity_radius_free_product():
    for m, expected in [(4, 1), (6, 2), (8, 3)]:
        r = injectivity_radius(GroupSpec.free(2),
                               GroupSpec.free_product_cyclic([m, m]), cap=8)
        assert r.exact and r.radius == expected, (m, r)


def test_injectivity_radius_identity_map():
    r = injectivity_radius(FREE2, GroupSpec.free(2), cap=5)
    assert not r.exact and r.radius == 5


def test_injectivity_radius_involution_quotient():
    # Free(1) -> Z_2: collision a = a' at radius 1
    r = injectivity_radius(GroupSpec.free(1),
                           GroupSpec.free_product_cyclic([2]), cap=5)
    assert r.exact and r.radius == 0
