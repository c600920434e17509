"""Finite-index normal subgroups presented by permutation actions.

A FiniteHom maps each generator of a group model to a permutation of
{0..q-1}.  The action must be transitive and regular, so points correspond
to the cosets of the kernel N and N is normal of index q.  On top of the
induced coset table this module computes Schreier transversals and
generators, shortest kernel elements, and three verifiers: check_c2
(smallest generator length realizes the kernel's smallest element length),
check_closure_invariance (conjugates of m-th powers of the basis stay in
the normal closure taken inside the subgroup) and injectivity_radius
(largest ball on which a quotient of group models stays injective).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ResourceCapError, SpecError
from .groups import (
    IDENTITY,
    Element,
    GroupSpec,
    default_max_ball,
    inverse,
    mul,
    shortlex_key,
)


def _invert_perm(perm):
    out = [0] * len(perm)
    for i, p in enumerate(perm):
        out[p] = i
    return tuple(out)


class FiniteHom:
    """Homomorphism onto a finite permutation group acting regularly.

    ``images`` assigns a permutation (0-based image list) to every base
    generator; inverse symbols act by the inverse permutations.  Validated
    at construction: permutations are bijections, involution generators get
    involution permutations, every defining relation of the domain model
    maps to the identity, the action is transitive, and the action is
    regular (the permutation group has order exactly ``degree``), which
    makes the point stabilizer of 0 equal to the kernel, hence normal.
    """

    def __init__(self, domain: GroupSpec, degree: int, images: dict):
        if not isinstance(degree, int) or degree < 1:
            raise SpecError("degree must be a positive integer")
        if set(images) != set(domain.generators):
            raise SpecError(
                f"images must cover exactly the generators {list(domain.generators)}")
        self.domain = domain
        self.degree = degree
        self.symbol_perm = {}
        for g in domain.generators:
            perm = images[g]
            if not isinstance(perm, (list, tuple)) or len(perm) != degree or \
                    sorted(perm) != list(range(degree)):
                raise SpecError(f"image of {g!r} is not a permutation of 0..{degree - 1}")
            perm = tuple(perm)
            gi = domain.inverse_symbol[g]
            if gi == g:
                if _invert_perm(perm) != perm:
                    raise SpecError(f"generator {g!r} is an involution but its "
                                    "image permutation is not")
                self.symbol_perm[g] = perm
            else:
                self.symbol_perm[g] = perm
                self.symbol_perm[gi] = _invert_perm(perm)

        for u, v in domain.relations():
            if self.perm_of_word(u) != self.perm_of_word(v):
                raise SpecError(f"relation {''.join(u)!r} = {''.join(v)!r} "
                                "is not preserved by the images")

        # transitivity: orbit of 0 under the symbols
        orbit = {0}
        stack = [0]
        while stack:
            p = stack.pop()
            for perm in self.symbol_perm.values():
                if perm[p] not in orbit:
                    orbit.add(perm[p])
                    stack.append(perm[p])
        if len(orbit) != degree:
            raise SpecError(f"action is not transitive: orbit of 0 has size {len(orbit)}")

        # regularity: the permutation group closure has order exactly degree
        identity = tuple(range(degree))
        group = {identity}
        frontier = [identity]
        gens = sorted(set(self.symbol_perm.values()))
        while frontier:
            nxt = []
            for p in frontier:
                for g in gens:
                    q = tuple(g[x] for x in p)
                    if q not in group:
                        group.add(q)
                        nxt.append(q)
                        if len(group) > degree:
                            raise SpecError(
                                "action is not regular: permutation group order "
                                f"exceeds the degree {degree}")
            frontier = nxt
        if len(group) != degree:
            raise SpecError("action is not regular")

    def act(self, point, word):
        """Image of a point under a word (applied left to right)."""
        for s in word:
            point = self.symbol_perm[s][point]
        return point

    def perm_of_word(self, word):
        perm = tuple(range(self.degree))
        for s in word:
            sp = self.symbol_perm[s]
            perm = tuple(sp[x] for x in perm)
        return perm

    def to_json(self):
        return {"degree": self.degree,
                "images": {g: list(self.symbol_perm[g]) for g in self.domain.generators}}

    @classmethod
    def from_json(cls, domain, doc):
        if not isinstance(doc, dict) or "degree" not in doc or "images" not in doc:
            raise SpecError("hom document needs 'degree' and 'images' fields")
        return cls(domain, doc["degree"], doc["images"])


class CosetTable:
    """Coset table and Schreier transversal induced by a FiniteHom.

    ``transversal[p]`` is the shortlex-least word reaching point p from 0 in
    the Schreier graph; the family is prefix-closed, and each word is also
    the canonical (group) normal form of its element.
    """

    def __init__(self, hom: FiniteHom):
        self.hom = hom
        self.spec = hom.domain
        self.degree = hom.degree
        transversal = [None] * hom.degree
        transversal[0] = IDENTITY
        queue = [0]
        while queue:
            nxt = []
            for p in queue:
                for s in self.spec.symbols:
                    q = hom.symbol_perm[s][p]
                    if transversal[q] is None:
                        transversal[q] = Element(transversal[p].word + (s,))
                        nxt.append(q)
            queue = nxt
        self.transversal = tuple(transversal)

    def act(self, point, symbol):
        return self.hom.symbol_perm[symbol][point]

    def act_word(self, point, word):
        return self.hom.act(point, word)

    def point_of(self, g):
        """The coset (point) of an element."""
        return self.hom.act(0, g.word)

    def representative(self, point):
        return self.transversal[point]


def build_coset_table(hom: FiniteHom) -> CosetTable:
    return CosetTable(hom)


def kernel_contains(table: CosetTable, g) -> bool:
    """Membership in the kernel N; regularity makes fixing 0 sufficient."""
    return table.point_of(g) == 0


@dataclass(frozen=True)
class SchreierBasis:
    """Kernel generators plus the per-edge rewrite table.

    ``edge_letter[(p, s)]`` is the signed 1-based index of the basis element
    equal to t_p s t_{p.s}^{-1}, or 0 when that element is the identity.
    Walking any kernel word through the coset table and emitting the letters
    expresses the word in terms of the basis (Schreier rewriting).
    """

    generators: tuple
    edge_letter: dict


def schreier_generators(table: CosetTable) -> SchreierBasis:
    """Reidemeister-Schreier generators of the kernel, shortlex-canonical.

    Each basis element is the shortlex-least of the pair {g, g^-1}; edges
    whose element is the inverse of a listed one get negative letters.  For
    a free domain of rank k the basis has exactly 1 + q(k-1) members.
    """
    spec = table.spec
    if spec.model not in ("free", "free_product_cyclic"):
        raise SpecError("schreier_generators needs a free or "
                        "free_product_cyclic domain")
    gens = []
    letter_of = {}
    edge_letter = {}
    for p in range(table.degree):
        t_p = table.transversal[p]
        for s in spec.symbols:
            q = table.act(p, s)
            g = mul(spec, Element(t_p.word + (s,)), inverse(spec, table.transversal[q]))
            if g == IDENTITY:
                edge_letter[(p, s)] = 0
                continue
            lt = letter_of.get(g)
            if lt is None:
                g_inv = inverse(spec, g)
                canon = min(g, g_inv, key=lambda x: shortlex_key(spec, x))
                gens.append(canon)
                letter_of[canon] = len(gens)
                if g_inv != g:
                    letter_of[inverse(spec, canon)] = -len(gens)
                lt = letter_of[g]
            edge_letter[(p, s)] = lt
    if spec.model == "free":
        expected = 1 + table.degree * (spec.rank - 1)
        if len(gens) != expected:
            raise SpecError(f"Schreier basis size {len(gens)} != expected {expected}")
    return SchreierBasis(generators=tuple(gens), edge_letter=edge_letter)


def schreier_rewrite(table: CosetTable, basis: SchreierBasis, g) -> tuple:
    """Express a kernel element as a freely reduced word in the basis letters."""
    point = 0
    letters = []
    for s in g.word:
        lt = basis.edge_letter[(point, s)]
        if lt != 0:
            if letters and letters[-1] == -lt:
                letters.pop()
            else:
                letters.append(lt)
        point = table.act(point, s)
    if point != 0:
        raise SpecError(f"element {g} is not in the kernel")
    return tuple(letters)


def basis_word_element(spec, basis: SchreierBasis, letters) -> Element:
    """Evaluate a signed-letter word back to a group element."""
    out = IDENTITY
    for lt in letters:
        h = basis.generators[abs(lt) - 1]
        out = mul(spec, out, h if lt > 0 else inverse(spec, h))
    return out


def min_kernel_element(spec, table: CosetTable, cap, max_size=None) -> Element:
    """Shortlex-least element of N minus the identity, by radius-capped BFS."""
    if not isinstance(cap, int) or cap < 1:
        raise SpecError("cap must be a positive integer")
    limit = default_max_ball() if max_size is None else max_size
    seen = {IDENTITY.word}
    frontier = [IDENTITY]
    for _ in range(cap):
        nxt = []
        for x in frontier:
            for s in spec.symbols:
                w = spec._normal_form_word(x.word + (s,))
                if w not in seen:
                    seen.add(w)
                    if len(seen) > limit:
                        raise ResourceCapError(
                            f"kernel search exceeded {limit} elements")
                    nxt.append(Element(w))
        if not nxt:
            raise SpecError("trivial kernel: the group was exhausted with no "
                            "nontrivial kernel element")
        nxt.sort(key=lambda g: shortlex_key(spec, g))
        for g in nxt:
            if kernel_contains(table, g):
                return g
        frontier = nxt
    raise ResourceCapError(f"no kernel element within radius {cap}")


def check_c2(spec, table: CosetTable, basis: SchreierBasis) -> bool:
    """True iff the shortest basis generator is as short as any kernel element."""
    if not basis.generators:
        raise SpecError("empty basis")
    min_gen = min(len(g.word) for g in basis.generators)
    shortest = min_kernel_element(spec, table, cap=min_gen)
    return len(shortest.word) == min_gen


def check_closure_invariance(spec, table: CosetTable, basis: SchreierBasis,
                             m: int, subset=None) -> bool:
    """Conjugation stability of S = {h_i^m} across the whole group.

    For every transversal representative t and every h_i in S, the element
    t h_i^m t^-1 lies in the kernel; it lies in the normal closure of S
    taken inside the kernel iff its Schreier rewriting dies in the quotient
    of the free basis group by the relations (letter_i)^m = 1 for i in the
    subset (all letters by default).  Syllable reduction decides that.

    ``subset`` (0-based basis indices) is a diagnostic mode probing a
    smaller S; the default checks the full symmetric set.
    """
    if spec.model != "free":
        raise SpecError("check_closure_invariance needs a free domain")
    if not isinstance(m, int) or m < 2:
        raise SpecError("m must be an integer >= 2")
    idxs = list(range(len(basis.generators))) if subset is None else sorted(set(subset))
    for i in idxs:
        if not 0 <= i < len(basis.generators):
            raise SpecError(f"subset index {i} out of range")
    torsion = set(idxs)
    for t in table.transversal:
        t_inv = inverse(spec, t)
        for i in idxs:
            h = basis.generators[i]
            w = t
            for _ in range(m):
                w = mul(spec, w, h)
            w = mul(spec, w, t_inv)
            letters = schreier_rewrite(table, basis, w)
            stack = []
            for lt in letters:
                idx = abs(lt) - 1
                d = 1 if lt > 0 else -1
                if stack and stack[-1][0] == idx:
                    stack[-1][1] += d
                    if idx in torsion:
                        stack[-1][1] %= m
                    if stack[-1][1] == 0:
                        stack.pop()
                else:
                    stack.append([idx, d % m if idx in torsion else d])
            if stack:
                return False
    return True


@dataclass(frozen=True)
class InjectivityRadius:
    """``radius`` with ``exact=False`` means: no collision up to the cap."""

    radius: int
    exact: bool

    def to_json(self):
        return {"radius": self.radius, "exact": self.exact}


def injectivity_radius(spec_before: GroupSpec, spec_after: GroupSpec,
                       cap: int, max_size=None) -> InjectivityRadius:
    """Largest r <= cap with distinct ball(r) elements still distinct after.

    Walks the source ball sphere by sphere, mapping canonical words through
    the quotient; the first collision at radius r proves the answer r - 1.
    Exhausting the cap (or the whole source group) returns a lower-bound
    marker instead.
    """
    if not isinstance(cap, int) or cap < 1:
        raise SpecError("cap must be a positive integer")

    def translate(sym):
        if sym in spec_after.rank_of:
            return sym
        if len(sym) == 2 and sym[1] == "'" and sym[0] in spec_after.rank_of \
                and spec_after.inverse_symbol[sym[0]] == sym[0]:
            return sym[0]
        raise SpecError(f"symbol {sym!r} has no counterpart in the quotient model")

    limit = default_max_ball() if max_size is None else max_size
    mapped = {spec_after._normal_form_word(()): ()}
    seen = {IDENTITY.word}
    frontier = [IDENTITY]
    for r in range(1, cap + 1):
        nxt = []
        for x in frontier:
            for s in spec_before.symbols:
                w = spec_before._normal_form_word(x.word + (s,))
                if w not in seen:
                    seen.add(w)
                    if len(seen) > limit:
                        raise ResourceCapError(
                            f"injectivity search exceeded {limit} elements")
                    nxt.append(Element(w))
        if not nxt:
            return InjectivityRadius(radius=cap, exact=False)
        nxt.sort(key=lambda g: shortlex_key(spec_before, g))
        for g in nxt:
            image = spec_after._normal_form_word(tuple(translate(s) for s in g.word))
            if image in mapped:
                return InjectivityRadius(radius=r - 1, exact=True)
            mapped[image] = g.word
        frontier = nxt
    return InjectivityRadius(radius=cap, exact=False)
