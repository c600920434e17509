"""Group models with computable normal forms and word-metric operations.

Four models share one element representation: an element *is* its canonical
word, the shortlex-least geodesic spelling over a fixed ordered symbol
alphabet.  The alphabet interleaves each generator with its formal inverse
(``a < a' < b < b' < ...``); a generator of order two is its own inverse and
appears once.  Canonical words make equality, hashing and the word metric
trivial: ``|g|`` is the length of the canonical word.

Models:

- ``grid`` -- free abelian of rank d, generators one per coordinate.
  Canonical word: coordinate runs in alphabet order (``aab'`` for (2, -1)).
- ``free`` -- free group, canonical word = freely reduced word.
- ``free_product_cyclic`` -- free product of finite cyclic groups; canonical
  word = alternating syllables with exponents in (-m/2, m/2], ties positive.
- ``rewriting`` -- quotient of the free group by a user-supplied terminating,
  locally confluent rewriting system (free cancellation built in).  The
  system is verified, never completed.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

from .errors import ResourceCapError, SpecError

MAX_BALL_ENV = "CAYLEYTILES_MAX_BALL"
DEFAULT_MAX_BALL = 5_000_000

_NAMES = "abcdefghijklmnopqrstuvwxyz"


def default_max_ball() -> int:
    """Ball-size resource cap; override with the CAYLEYTILES_MAX_BALL env var."""
    raw = os.environ.get(MAX_BALL_ENV)
    if raw is None:
        return DEFAULT_MAX_BALL
    try:
        value = int(raw)
    except ValueError as exc:
        raise SpecError(f"{MAX_BALL_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise SpecError(f"{MAX_BALL_ENV} must be at least 1")
    return value


@dataclass(frozen=True)
class Element:
    """A group element, stored as its canonical word."""

    word: tuple[str, ...]

    def __str__(self) -> str:
        return "".join(self.word)

    def __repr__(self) -> str:
        return f"Element({''.join(self.word)!r})"

    def __len__(self) -> int:
        return len(self.word)


IDENTITY = Element(())


@dataclass
class RewritingReport:
    """Outcome of validating a rewriting system."""

    ok: bool
    problems: list = field(default_factory=list)
    rules_checked: int = 0
    pairs_checked: int = 0

    def first_problem(self):
        return self.problems[0] if self.problems else None


class GroupSpec:
    """A group model over a fixed symmetric generating alphabet.

    Instances are immutable after construction; every operation in this
    module is a pure function of its arguments and may be shared freely
    between threads.
    """

    def __init__(self, model, *, dim=None, rank=None, orders=None,
                 generators=None, inverses=None, rules=None, validate=True):
        self.model = model
        if model == "grid":
            if not isinstance(dim, int) or dim < 1:
                raise SpecError("grid model needs an integer dim >= 1")
            if dim > len(_NAMES):
                raise SpecError(f"grid dim capped at {len(_NAMES)}")
            self.dim = dim
            self.generators = tuple(_NAMES[:dim])
            self.inverse_names = tuple(g + "'" for g in self.generators)
        elif model == "free":
            if not isinstance(rank, int) or rank < 1:
                raise SpecError("free model needs an integer rank >= 1")
            if rank > len(_NAMES):
                raise SpecError(f"free rank capped at {len(_NAMES)}")
            self.rank = rank
            self.generators = tuple(_NAMES[:rank])
            self.inverse_names = tuple(g + "'" for g in self.generators)
        elif model == "free_product_cyclic":
            orders = tuple(orders or ())
            if not orders or any(not isinstance(m, int) or m < 2 for m in orders):
                raise SpecError("free_product_cyclic needs factor orders, each an integer >= 2")
            if len(orders) > len(_NAMES):
                raise SpecError(f"factor count capped at {len(_NAMES)}")
            self.orders = orders
            self.generators = tuple(_NAMES[:len(orders)])
            # an order-2 generator is an involution: it is its own inverse
            self.inverse_names = tuple(
                g if m == 2 else g + "'" for g, m in zip(self.generators, orders))
        elif model == "rewriting":
            self.generators = tuple(generators or ())
            self.inverse_names = tuple(inverses or ())
            if not self.generators:
                raise SpecError("rewriting model needs at least one generator")
            if len(self.inverse_names) != len(self.generators):
                raise SpecError("generators and inverses must have the same length")
            for g, gi in zip(self.generators, self.inverse_names):
                for name in (g, gi):
                    if not (len(name) == 1 and name.isalnum()) and \
                       not (len(name) == 2 and name[0].isalnum() and name[1] == "'"):
                        raise SpecError(
                            f"symbol {name!r} must be one alphanumeric character "
                            "with an optional trailing apostrophe")
                if gi != g and gi[0] == g[0] and gi != g + "'":
                    raise SpecError(f"inverse of {g!r} may reuse its letter only as {g + chr(39)!r}")
        else:
            raise SpecError(f"unknown model {model!r}")

        if len(set(self.generators)) != len(self.generators):
            raise SpecError("duplicate generator names")

        # symbol table: generator, then its inverse, in generator order
        symbols = []
        inverse_symbol = {}
        for g, gi in zip(self.generators, self.inverse_names):
            if g == gi:
                symbols.append(g)
                inverse_symbol[g] = g
            else:
                symbols.extend((g, gi))
                inverse_symbol[g] = gi
                inverse_symbol[gi] = g
        if len(set(symbols)) != len(symbols):
            raise SpecError("symbol names collide")
        self.symbols = tuple(symbols)
        self.inverse_symbol = inverse_symbol
        self.rank_of = {s: i for i, s in enumerate(self.symbols)}

        if model == "grid":
            self._step = {}
            for i, (g, gi) in enumerate(zip(self.generators, self.inverse_names)):
                self._step[g] = (i, 1)
                self._step[gi] = (i, -1)
        elif model == "free_product_cyclic":
            self._step = {}
            for i, (g, gi) in enumerate(zip(self.generators, self.inverse_names)):
                self._step[g] = (i, 1)
                if gi != g:
                    self._step[gi] = (i, -1)

        self.user_rules = ()
        self._report = RewritingReport(ok=True)
        if model == "rewriting":
            parsed = []
            for pair in (rules or ()):
                lhs, rhs = pair
                parsed.append((parse_word(self, lhs), parse_word(self, rhs)))
            self.user_rules = tuple(parsed)
            self._all_rules, self._report = self._prepare_rules()
            self._max_lhs = max((len(l) for l, _ in self._all_rules), default=1)
            if validate and not self._report.ok:
                problem = self._report.first_problem()
                raise SpecError(f"invalid rewriting system: {problem}")

        self._nf_cache = {}

    # -- construction helpers -------------------------------------------------

    @classmethod
    def grid(cls, dim):
        return cls("grid", dim=dim)

    @classmethod
    def free(cls, rank):
        return cls("free", rank=rank)

    @classmethod
    def free_product_cyclic(cls, orders):
        return cls("free_product_cyclic", orders=orders)

    @classmethod
    def rewriting(cls, generators, inverses, rules, validate=True):
        return cls("rewriting", generators=generators, inverses=inverses,
                   rules=rules, validate=validate)

    def to_json(self):
        if self.model == "grid":
            return {"model": "grid", "dim": self.dim}
        if self.model == "free":
            return {"model": "free", "rank": self.rank}
        if self.model == "free_product_cyclic":
            return {"model": "free_product_cyclic", "orders": list(self.orders)}
        return {
            "model": "rewriting",
            "generators": list(self.generators),
            "inverses": list(self.inverse_names),
            "rules": [["".join(lhs), "".join(rhs)] for lhs, rhs in self.user_rules],
        }

    @classmethod
    def from_json(cls, doc):
        if not isinstance(doc, dict) or "model" not in doc:
            raise SpecError("group document must be an object with a 'model' field")
        model = doc["model"]
        if model == "grid":
            return cls.grid(doc.get("dim"))
        if model == "free":
            return cls.free(doc.get("rank"))
        if model == "free_product_cyclic":
            return cls.free_product_cyclic(doc.get("orders"))
        if model == "rewriting":
            return cls.rewriting(doc.get("generators"), doc.get("inverses"),
                                 doc.get("rules", []))
        raise SpecError(f"unknown model {model!r}")

    def __eq__(self, other):
        return isinstance(other, GroupSpec) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(json.dumps(self.to_json(), sort_keys=True))

    def __repr__(self):
        return f"GroupSpec({self.to_json()!r})"

    # -- rewriting-system preparation and validation --------------------------

    def _cancellation_rules(self):
        rules = set()
        for s in self.symbols:
            rules.add(((s, self.inverse_symbol[s]), ()))
        return rules

    def _prepare_rules(self):
        report = RewritingReport(ok=True)
        key = lambda w: (len(w), tuple(self.rank_of[s] for s in w))
        for lhs, rhs in self.user_rules:
            report.rules_checked += 1
            if not lhs:
                report.problems.append({"kind": "orientation",
                                        "rule": ["".join(lhs), "".join(rhs)],
                                        "reason": "empty left side"})
            elif not key(lhs) > key(rhs):
                report.problems.append({"kind": "orientation",
                                        "rule": ["".join(lhs), "".join(rhs)],
                                        "reason": "not length-reducing or "
                                                  "length-preserving shortlex-reducing"})
        if report.problems:
            report.ok = False
            return (), report

        combined = self._cancellation_rules()
        combined.update(self.user_rules)
        all_rules = tuple(sorted(combined, key=lambda r: (key(r[0]), key(r[1]))))
        max_lhs = max(len(lhs) for lhs, _ in all_rules)

        def reduce(word):
            return _rewrite_fixpoint(word, all_rules, max_lhs)

        for l1, r1 in all_rules:
            for l2, r2 in all_rules:
                # factor overlap: l2 occurs inside l1
                for i in range(len(l1) - len(l2) + 1):
                    if (l1, r1) == (l2, r2) and i == 0:
                        continue
                    if l1[i:i + len(l2)] == l2:
                        report.pairs_checked += 1
                        one = reduce(r1)
                        two = reduce(l1[:i] + r2 + l1[i + len(l2):])
                        if one != two:
                            report.ok = False
                            report.problems.append({
                                "kind": "overlap",
                                "word": "".join(l1),
                                "left": "".join(one),
                                "right": "".join(two)})
                            return all_rules, report
                # proper overlap: a suffix of l1 is a prefix of l2
                for t in range(1, min(len(l1), len(l2))):
                    if l1[len(l1) - t:] == l2[:t]:
                        report.pairs_checked += 1
                        one = reduce(r1 + l2[t:])
                        two = reduce(l1[:len(l1) - t] + r2)
                        if one != two:
                            report.ok = False
                            report.problems.append({
                                "kind": "overlap",
                                "word": "".join(l1 + l2[t:]),
                                "left": "".join(one),
                                "right": "".join(two)})
                            return all_rules, report
        return all_rules, report

    # -- normal forms ----------------------------------------------------------

    def _normal_form_word(self, word):
        cached = self._nf_cache.get(word)
        if cached is not None:
            return cached
        if self.model == "grid":
            out = self._nf_grid(word)
        elif self.model == "free":
            out = self._nf_free(word)
        elif self.model == "free_product_cyclic":
            out = self._nf_fpc(word)
        else:
            if not self._report.ok:
                raise SpecError("rewriting system failed validation; "
                                "no normal forms available")
            out = _rewrite_fixpoint(word, self._all_rules, self._max_lhs)
        if len(self._nf_cache) < 1_000_000:
            self._nf_cache[word] = out
        return out

    def _nf_grid(self, word):
        vec = [0] * self.dim
        for s in word:
            i, delta = self._step[s]
            vec[i] += delta
        out = []
        for i, e in enumerate(vec):
            sym = self.generators[i] if e > 0 else self.inverse_names[i]
            out.extend([sym] * abs(e))
        return tuple(out)

    def _nf_free(self, word):
        out = []
        for s in word:
            if out and out[-1] == self.inverse_symbol[s]:
                out.pop()
            else:
                out.append(s)
        return tuple(out)

    def _nf_fpc(self, word):
        stack = []
        for s in word:
            i, delta = self._step[s]
            m = self.orders[i]
            if stack and stack[-1][0] == i:
                stack[-1][1] = (stack[-1][1] + delta) % m
                if stack[-1][1] == 0:
                    stack.pop()
            else:
                stack.append([i, delta % m])
        out = []
        for i, e in stack:
            m = self.orders[i]
            if e > m // 2:
                e -= m
            if e > 0:
                out.extend([self.generators[i]] * e)
            else:
                out.extend([self.inverse_names[i]] * (-e))
        return tuple(out)

    def relations(self):
        """Defining relations as word pairs (u, v) with u = v in the group."""
        if self.model == "grid":
            pairs = []
            for i in range(self.dim):
                for j in range(i + 1, self.dim):
                    a, b = self.generators[i], self.generators[j]
                    pairs.append(((a, b), (b, a)))
            return pairs
        if self.model == "free":
            return []
        if self.model == "free_product_cyclic":
            return [((g,) * m, ()) for g, m in zip(self.generators, self.orders)]
        return list(self.user_rules)


def _rewrite_fixpoint(word, rules, max_lhs):
    w = list(word)
    i = 0
    while i < len(w):
        for lhs, rhs in rules:
            n = len(lhs)
            if i + n <= len(w) and tuple(w[i:i + n]) == lhs:
                w[i:i + n] = rhs
                i = max(i - max_lhs + 1, 0)
                break
        else:
            i += 1
    return tuple(w)


# -- parsing and formatting ----------------------------------------------------


def parse_word(spec, text):
    """Tokenize an element string like ``"aba'"`` into a symbol tuple."""
    if not isinstance(text, str):
        raise SpecError(f"element must be a string, got {type(text).__name__}")
    word = []
    i = 0
    while i < len(text):
        ch = text[i]
        if i + 1 < len(text) and text[i + 1] == "'":
            tok, step = ch + "'", 2
        else:
            tok, step = ch, 1
        if tok not in spec.rank_of:
            # accept x' for an involution x whose formal inverse is x itself
            if step == 2 and ch in spec.rank_of and spec.inverse_symbol.get(ch) == ch:
                tok = ch
            else:
                raise SpecError(f"unknown symbol {tok!r} in {text!r}")
        word.append(tok)
        i += step
    return tuple(word)


def element(spec, text):
    """Parse and normalize an element string."""
    return normal_form(spec, parse_word(spec, text))


def spec_digest(spec):
    blob = json.dumps(spec.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# -- core operations -------------------------------------------------------------


def normal_form(spec, word):
    """Canonical representative of a word (tuple of symbols or Element)."""
    if isinstance(word, Element):
        word = word.word
    word = tuple(word)
    for s in word:
        if s not in spec.rank_of:
            raise SpecError(f"unknown symbol {s!r}")
    return Element(spec._normal_form_word(word))


def shortlex_key(spec, g):
    word = g.word if isinstance(g, Element) else tuple(g)
    return (len(word), tuple(spec.rank_of[s] for s in word))


def sorted_elements(spec, elements):
    return sorted(elements, key=lambda g: shortlex_key(spec, g))


def mul(spec, x, y):
    return Element(spec._normal_form_word(x.word + y.word))


def inverse(spec, x):
    inv = tuple(spec.inverse_symbol[s] for s in reversed(x.word))
    return Element(spec._normal_form_word(inv))


def length(spec, g):
    return len(g.word)


def distance(spec, x, y):
    inv = tuple(spec.inverse_symbol[s] for s in reversed(x.word))
    return len(spec._normal_form_word(inv + y.word))


def neighbors(spec, x):
    """Distance-1 neighbors of x, deduplicated, in symbol order."""
    out = []
    seen = set()
    for s in spec.symbols:
        y = Element(spec._normal_form_word(x.word + (s,)))
        if y.word not in seen and y != x:
            seen.add(y.word)
            out.append(y)
    return out


def ball(spec, center, r, max_size=None):
    """All elements within distance r of center, BFS layer by layer.

    The returned list is ordered by (distance from center, shortlex), so for
    center = 1 it is in plain shortlex order.  Raises ResourceCapError when
    the enumeration exceeds the cap.
    """
    if not isinstance(r, int) or r < 0:
        raise SpecError("radius must be a non-negative integer")
    cap = default_max_ball() if max_size is None else max_size
    seen = {center.word}
    out = [center]
    frontier = [center]
    for _ in range(r):
        nxt = []
        for x in frontier:
            for s in spec.symbols:
                w = spec._normal_form_word(x.word + (s,))
                if w not in seen:
                    seen.add(w)
                    if len(seen) > cap:
                        raise ResourceCapError(
                            f"ball enumeration exceeded {cap} elements")
                    nxt.append(Element(w))
        nxt.sort(key=lambda g: shortlex_key(spec, g))
        out.extend(nxt)
        if not nxt:
            break
        frontier = nxt
    return out


def sphere(spec, center, r, max_size=None):
    """Elements at distance exactly r from center, shortlex-sorted."""
    if r == 0:
        return [center]
    inner = ball(spec, center, r - 1, max_size=max_size)
    outer = ball(spec, center, r, max_size=max_size)
    return outer[len(inner):]


def boundary(spec, A):
    """Inner boundary: members of A with at least one neighbor outside A."""
    A = set(A)
    out = set()
    for x in A:
        for s in spec.symbols:
            y = Element(spec._normal_form_word(x.word + (s,)))
            if y != x and y not in A:
                out.add(x)
                break
    return out


def set_distance(spec, A, B, max_size=None):
    """min d(x, y) over x in A, y in B; 0 iff the sets meet."""
    A, B = set(A), set(B)
    if not A or not B:
        raise SpecError("set_distance needs nonempty sets")
    if A & B:
        return 0
    cap = default_max_ball() if max_size is None else max_size
    seen = set(A)
    frontier = A
    dist = 0
    while frontier:
        dist += 1
        nxt = set()
        for x in frontier:
            for s in spec.symbols:
                y = Element(spec._normal_form_word(x.word + (s,)))
                if y in B:
                    return dist
                if y not in seen:
                    seen.add(y)
                    if len(seen) > cap:
                        raise ResourceCapError(
                            f"set_distance search exceeded {cap} elements")
                    nxt.add(y)
        frontier = nxt
    raise SpecError("set_distance failed to connect the sets")


def is_connected(spec, A):
    """True iff A induces a connected subgraph of the Cayley graph."""
    A = set(A)
    if len(A) <= 1:
        return True
    start = next(iter(A))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for s in spec.symbols:
            y = Element(spec._normal_form_word(x.word + (s,)))
            if y in A and y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(A)


def validate_rewriting(spec):
    """Re-run termination-orientation and critical-pair checks; return the report."""
    if spec.model != "rewriting":
        raise SpecError("validate_rewriting needs a rewriting-model spec")
    _, report = spec._prepare_rules()
    return report


def grid_coords(spec, g):
    """Integer coordinates of a grid-model element."""
    if spec.model != "grid":
        raise SpecError("grid_coords needs a grid-model spec")
    vec = [0] * spec.dim
    for s in g.word:
        i, delta = spec._step[s]
        vec[i] += delta
    return tuple(vec)


def grid_element(spec, coords):
    """Grid-model element with the given integer coordinates."""
    if spec.model != "grid":
        raise SpecError("grid_element needs a grid-model spec")
    coords = tuple(coords)
    if len(coords) != spec.dim:
        raise SpecError(f"expected {spec.dim} coordinates, got {len(coords)}")
    word = []
    for i, e in enumerate(coords):
        sym = spec.generators[i] if e > 0 else spec.inverse_names[i]
        word.extend([sym] * abs(e))
    return Element(tuple(word))
