"""Groups, words, and the normal-form calculus of partial representations.

Two kinds of groups are supported: finite groups given by a Cayley table
(elements are the integers ``0..n-1``) and free abelian groups of rank k
(elements are ints for rank 1 and integer tuples otherwise).  Free abelian
groups are never enumerated; finite windows ``{-N..N}^k`` stand in for them.

A word is a tuple of group elements.  The monomial ``v_{g1} ... v_{gn}`` of a
partial representation has the normal form ``e_S v_g`` where ``g`` is the
product of the letters and ``S`` is the set of prefix products.  The pair
``(S, g)`` is an :class:`EMonomial`; multiplication and involution of
monomials are computed purely on these pairs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np

Element = Hashable
Word = tuple


class GroupError(ValueError):
    """An element or word does not belong to the group it is used with."""


class Group:
    identity: Element
    finite: bool

    def mul(self, g: Element, h: Element) -> Element:
        raise NotImplementedError

    def inv(self, g: Element) -> Element:
        raise NotImplementedError

    def contains(self, g: object) -> bool:
        raise NotImplementedError

    def canon(self, g: object) -> Element:
        """Return the canonical form of ``g`` or raise :class:`GroupError`."""
        raise NotImplementedError

    def window(self, radius: int | None = None) -> list:
        raise NotImplementedError

    def prod(self, elements: Iterable[Element]) -> Element:
        out = self.identity
        for g in elements:
            out = self.mul(out, g)
        return out

    def conj_set(self, g: Element, S: Iterable[Element]) -> tuple:
        """Left translate ``gS`` as a sorted tuple."""
        return tuple(sorted({self.mul(g, s) for s in S}))


class FiniteGroup(Group):
    """A finite group given by its Cayley table ``table[a][b] = a*b``."""

    finite = True

    def __init__(self, table: Sequence[Sequence[int]], labels: Sequence[str] | None = None,
                 name: str = "G", check: bool = True):
        t = np.asarray(table, dtype=int)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise GroupError("Cayley table must be a non-empty square array")
        n = t.shape[0]
        if t.min() < 0 or t.max() >= n:
            raise GroupError("Cayley table entries must lie in 0..n-1")
        self.table = t
        self.order = n
        self.name = name
        self.labels = list(labels) if labels is not None else [str(i) for i in range(n)]
        ids = [e for e in range(n) if all(t[e, x] == x and t[x, e] == x for x in range(n))]
        if len(ids) != 1:
            raise GroupError("Cayley table has no two-sided identity")
        self.identity = ids[0]
        inv = []
        for x in range(n):
            cands = [y for y in range(n) if t[x, y] == self.identity and t[y, x] == self.identity]
            if not cands:
                raise GroupError(f"element {x} has no inverse")
            inv.append(cands[0])
        self._inv = inv
        if check:
            self.check_axioms()

    def check_axioms(self) -> None:
        t = self.table
        # (ab)c == a(bc) for all triples, vectorised
        lhs = t[t[:, :, None], np.arange(self.order)[None, None, :]]
        rhs = t[np.arange(self.order)[:, None, None], t[None, :, :]]
        if not np.array_equal(lhs, rhs):
            bad = np.argwhere(lhs != rhs)[0]
            raise GroupError(f"Cayley table is not associative at {tuple(int(i) for i in bad)}")

    def mul(self, g, h):
        return int(self.table[g, h])

    def inv(self, g):
        return self._inv[g]

    def contains(self, g) -> bool:
        return isinstance(g, (int, np.integer)) and not isinstance(g, bool) and 0 <= g < self.order

    def canon(self, g):
        if not self.contains(g):
            raise GroupError(f"{g!r} is not an element of {self.name}")
        return int(g)

    def elements(self) -> list[int]:
        return list(range(self.order))

    def window(self, radius=None) -> list[int]:
        return self.elements()

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise GroupError("cyclic group order must be positive")
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    return FiniteGroup(table, name=f"Z{n}")


def symmetric(n: int) -> FiniteGroup:
    """Symmetric group on n letters; element 0 is the identity permutation.

    Permutations are ordered lexicographically and composed as functions,
    ``(p*q)(i) = p(q(i))``.
    """
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms]
    labels = ["".join(str(x) for x in p) for p in perms]
    return FiniteGroup(table, labels=labels, name=f"S{n}")


class FreeAbelianGroup(Group):
    """The group Z^k under addition.  Rank-1 elements are plain ints."""

    finite = False

    def __init__(self, rank: int, default_radius: int = 4):
        if rank < 1:
            raise GroupError("rank must be at least 1")
        self.rank = rank
        self.default_radius = default_radius
        self.identity = 0 if rank == 1 else (0,) * rank
        self.name = "Z" if rank == 1 else f"Z^{rank}"

    def canon(self, g):
        if self.rank == 1:
            if isinstance(g, (tuple, list)) and len(g) == 1:
                g = g[0]
            if isinstance(g, (int, np.integer)) and not isinstance(g, bool):
                return int(g)
            raise GroupError(f"{g!r} is not an element of {self.name}")
        if isinstance(g, (tuple, list, np.ndarray)) and len(g) == self.rank and all(
                isinstance(x, (int, np.integer)) and not isinstance(x, bool) for x in g):
            return tuple(int(x) for x in g)
        raise GroupError(f"{g!r} is not an element of {self.name}")

    def contains(self, g) -> bool:
        try:
            return self.canon(g) == g
        except GroupError:
            return False

    def mul(self, g, h):
        if self.rank == 1:
            return g + h
        return tuple(a + b for a, b in zip(g, h))

    def inv(self, g):
        if self.rank == 1:
            return -g
        return tuple(-a for a in g)

    def unit(self, i: int, sign: int = 1):
        if self.rank == 1:
            return sign
        return tuple(sign if j == i else 0 for j in range(self.rank))

    def generators(self) -> list:
        """The symmetric generating set ``{+-e_i}``."""
        return [self.unit(i, s) for i in range(self.rank) for s in (1, -1)]

    def coords(self, g) -> tuple[int, ...]:
        return (g,) if self.rank == 1 else tuple(g)

    def from_coords(self, c: Sequence[int]):
        return int(c[0]) if self.rank == 1 else tuple(int(x) for x in c)

    def window(self, radius=None) -> list:
        r = self.default_radius if radius is None else radius
        pts = itertools.product(range(-r, r + 1), repeat=self.rank)
        return [self.from_coords(p) for p in pts]

    def __repr__(self) -> str:
        return f"FreeAbelianGroup(rank={self.rank})"


# --------------------------------------------------------------------------
# words

def check_word(G: Group, word: Iterable) -> Word:
    try:
        return tuple(G.canon(g) for g in word)
    except GroupError as exc:
        raise GroupError(f"word entry outside {getattr(G, 'name', G)}: {exc}") from None


def word_dot(G: Group, word: Iterable) -> Element:
    return G.prod(check_word(G, word))


def word_mu(G: Group, word: Iterable) -> frozenset:
    """The set of prefix products, including the empty prefix."""
    out = [G.identity]
    acc = G.identity
    for g in check_word(G, word):
        acc = G.mul(acc, g)
        out.append(acc)
    return frozenset(out)


def word_inverse(G: Group, word: Iterable) -> Word:
    return tuple(G.inv(g) for g in reversed(check_word(G, word)))


def words(letters: Sequence, max_length: int, min_length: int = 0) -> Iterator[Word]:
    for n in range(min_length, max_length + 1):
        yield from itertools.product(letters, repeat=n)


@dataclass(frozen=True)
class EMonomial:
    """Normal form ``e_S v_g``: ``S`` is a sorted tuple containing 1 and ``g``."""

    support: tuple
    degree: Element

    @classmethod
    def make(cls, G: Group, S: Iterable, g) -> "EMonomial":
        S = {G.canon(s) for s in S}
        g = G.canon(g)
        if G.identity not in S or g not in S:
            raise GroupError("normal form set must contain 1 and the degree")
        return cls(tuple(sorted(S)), g)

    def is_valid(self, G: Group) -> bool:
        return G.identity in self.support and self.degree in self.support


def nf(G: Group, word: Iterable) -> EMonomial:
    word = check_word(G, word)
    return EMonomial(tuple(sorted(word_mu(G, word))), word_dot(G, word))


def em_identity(G: Group) -> EMonomial:
    return EMonomial((G.identity,), G.identity)


def em_mul(G: Group, x: EMonomial, y: EMonomial) -> EMonomial:
    """``(S, g)(T, h) = (S u gT, gh)``."""
    S = set(x.support)
    S.update(G.mul(x.degree, t) for t in y.support)
    return EMonomial(tuple(sorted(S)), G.mul(x.degree, y.degree))


def em_star(G: Group, x: EMonomial) -> EMonomial:
    """``(S, g)* = (g^-1 S, g^-1)``."""
    gi = G.inv(x.degree)
    return EMonomial(G.conj_set(gi, x.support), gi)


def em_idempotent(G: Group, x: EMonomial) -> EMonomial:
    """The range projection ``x x*``, which is ``(S, 1)``."""
    return EMonomial(x.support, G.identity)


def em_leq(x: EMonomial, y: EMonomial) -> bool:
    """Whether ``e_x >= e_y``, i.e. ``S_x`` is contained in ``S_y``."""
    return set(x.support) <= set(y.support)


# --------------------------------------------------------------------------
# exhaustive identity suite

def word_identity_suite(G: Group, letters: Sequence, max_length: int = 4):
    """Check the normal-form identities on all words up to ``max_length``.

    Returns a :class:`~interaction_groups.report.Report`.  Every comparison is
    exact set/element equality.
    """
    from .report import Check, Report

    letters = [G.canon(g) for g in letters]
    ws = list(words(letters, max_length))
    forms = {w: nf(G, w) for w in ws}
    one = G.identity
    rep = Report(f"word identities over {getattr(G, 'name', G)} (length <= {max_length})")

    bad_hom, n_hom = [], 0
    for a in ws:
        fa = forms[a]
        for b in ws:
            n_hom += 1
            if nf(G, a + b) != em_mul(G, fa, forms[b]):
                bad_hom.append((a, b))
    rep.add(Check.flag("words.homomorphism", "nf(ab) = nf(a) nf(b)", not bad_hom,
                       witness={"pairs": n_hom, "violations": bad_hom[:5]}))

    bad_star, bad_mu, bad_pi, bad_27 = [], [], [], []
    idem_forms = {}
    for a in ws:
        fa = forms[a]
        ai = word_inverse(G, a)
        if em_star(G, fa) != forms.get(ai, nf(G, ai)):
            bad_star.append(a)
        if fa.degree == one and word_mu(G, a) != word_mu(G, ai):
            bad_mu.append(a)
        if em_mul(G, fa, em_mul(G, em_star(G, fa), fa)) != fa:
            bad_pi.append(a)
        if a:
            lead = EMonomial(tuple(sorted({one, fa.degree})), one)
            prefix = forms.get(a[:-1], nf(G, a[:-1]))
            if em_idempotent(G, fa) != em_mul(G, lead, em_idempotent(G, prefix)):
                bad_27.append(a)
        idem_forms[a] = fa
    rep.add(Check.flag("words.involution", "nf(a)* = nf(a^-1)", not bad_star, witness=bad_star[:5]))
    rep.add(Check.flag("words.closed_mu", "a. = 1 implies mu(a) = mu(a^-1)", not bad_mu,
                       witness=bad_mu[:5]))
    rep.add(Check.flag("words.partial_isometry", "x x* x = x", not bad_pi, witness=bad_pi[:5]))
    rep.add(Check.flag("words.last_letter", "e_a = e_{a.} e_{a minus last letter}", not bad_27,
                       witness=bad_27[:5]))

    # absorption: a. = 1 and mu(a) within mu(b) gives v_a v_b = v_b
    closed = [a for a in ws if forms[a].degree == one]
    bad_abs, n_abs = [], 0
    for a in closed:
        Sa = set(forms[a].support)
        for b in ws:
            fb = forms[b]
            if Sa <= set(fb.support):
                n_abs += 1
                if em_mul(G, forms[a], fb) != fb:
                    bad_abs.append((a, b))
    rep.add(Check.flag("words.absorption", "a. = 1, mu(a) in mu(b) gives v_a v_b = v_b", not bad_abs,
                       witness={"pairs": n_abs, "violations": bad_abs[:5]}))
    return rep
