"""Interaction groups ``(A, G, V)`` and verification of their axioms.

For a finite group ``V`` is a table ``g -> LinMap``.  For ``Z^k`` it is a rule
``g -> LinMap`` evaluated lazily; values are memoised behind a lock so each
group element is computed once even when several threads ask for it.
"""
from __future__ import annotations

import itertools
import threading
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .algebra import (TOL, FdAlgebra, LinMap, Subspace, certify_checks, cond_exp_check,
                      gram_matrix, is_conditional_expectation, min_eig, op_norm)
from .groups import FreeAbelianGroup, Group, GroupError, check_word, word_inverse, word_mu
from .report import Check, Report

DEFAULT_WINDOW = 3


class InteractionGroup:
    def __init__(self, group: Group, alg: FdAlgebra, table: Mapping | None = None,
                 rule: Callable | None = None, name: str = "V"):
        if (table is None) == (rule is None):
            raise ValueError("give exactly one of table or rule")
        self.group = group
        self.alg = alg
        self.name = name
        self._rule = rule
        self._cache: dict = {}
        self._lock = threading.Lock()
        if table is not None:
            for g, V in table.items():
                g = group.canon(g)
                if not isinstance(V, LinMap):
                    V = LinMap(alg, V)
                if V.alg != alg:
                    raise ValueError(f"map for {g!r} acts on a different algebra")
                self._cache[g] = V
            self._cache.setdefault(group.identity, LinMap.identity(alg))
            if group.finite:
                missing = [g for g in group.window() if g not in self._cache]
                if missing:
                    raise ValueError(f"no map given for group elements {missing}")

    def map(self, g) -> LinMap:
        g = self.group.canon(g)
        hit = self._cache.get(g)
        if hit is not None:
            return hit
        if self._rule is None:
            raise KeyError(f"no map for {g!r}")
        with self._lock:
            hit = self._cache.get(g)
            if hit is None:
                hit = self._rule(g)
                if not isinstance(hit, LinMap):
                    hit = LinMap(self.alg, hit)
                self._cache[g] = hit
        return hit

    def expectation(self, g) -> LinMap:
        return self.map(g) @ self.map(self.group.inv(g))

    def window(self, radius: int | None = None) -> list:
        if self.group.finite:
            return self.group.window()
        return self.group.window(DEFAULT_WINDOW if radius is None else radius)

    def range(self, g) -> Subspace:
        return self.expectation(g).range()

    def __repr__(self) -> str:
        return f"InteractionGroup({self.name}, {self.group!r}, {self.alg!r})"


def commuting_power_rule(G: FreeAbelianGroup, gen_maps: Mapping) -> Callable:
    """Rule ``V_g = prod_i V_{sign(g_i) e_i}^{|g_i|}`` from maps on ``+-e_i``.

    Only valid when the generator maps commute in the required way; callers
    verify the resulting group.
    """
    maps = {G.canon(k): v for k, v in gen_maps.items()}

    def rule(g):
        out = None
        for i, c in enumerate(G.coords(g)):
            if c == 0:
                continue
            step = maps[G.unit(i, 1 if c > 0 else -1)]
            term = step.power(abs(c))
            out = term if out is None else out @ term
        if out is None:
            alg = next(iter(maps.values())).alg
            return LinMap.identity(alg)
        return out

    return rule


def _window(ig: InteractionGroup, window) -> list:
    G = ig.group
    win = ig.window() if window is None else (
        ig.window(window) if isinstance(window, int) else [G.canon(g) for g in window])
    win_set = set(win)
    if G.identity not in win_set:
        raise GroupError("verification window must contain the identity")
    if any(G.inv(g) not in win_set for g in win):
        raise GroupError("verification window must be closed under inverses")
    return win


def _worst(items: Iterable, fn, pairs: bool = False) -> tuple[float, object]:
    worst, where = 0.0, None
    for p in items:
        r = fn(*p) if pairs else fn(p)
        if r > worst:
            worst, where = r, p
    return worst, where


def verify_partial_rep(ig: InteractionGroup, window=None, tol: float = TOL) -> Report:
    G = ig.group
    win = _window(ig, window)
    rep = Report(f"partial representation laws for {ig.name}")
    n2 = lambda M: float(np.linalg.norm(M, 2))
    I = np.eye(ig.alg.d)
    rep.add(Check.residual_check("prep.unit", "V_1 = id", n2(ig.map(G.identity).mat - I), tol))
    V = {g: ig.map(g).mat for g in win}
    # V on products gh may fall outside a window of ZZ^k; those are evaluated lazily
    Vx = lambda g: V[g] if g in V else ig.map(g).mat
    E = {g: V[g] @ V[G.inv(g)] for g in win}
    Ex = lambda g: E[g] if g in E else ig.expectation(g).mat
    pairs = [(g, h) for g in win for h in win]
    r, w = _worst(pairs, lambda g, h: n2(V[g] @ V[h] @ V[G.inv(h)] - Vx(G.mul(g, h)) @ V[G.inv(h)]), True)
    rep.add(Check.residual_check("prep.right", "V_g V_h V_h^-1 = V_gh V_h^-1", r, tol, witness=w))
    r, w = _worst(pairs, lambda g, h: n2(V[G.inv(g)] @ V[g] @ V[h] - V[G.inv(g)] @ Vx(G.mul(g, h))), True)
    rep.add(Check.residual_check("prep.left", "V_g^-1 V_g V_h = V_g^-1 V_gh", r, tol, witness=w))
    r, w = _worst(win, lambda g: n2(E[g] @ E[g] - E[g]))
    rep.add(Check.residual_check("prep.idempotent", "E_g E_g = E_g", r, tol, witness=w))
    r, w = _worst(pairs, lambda g, h: n2(V[g] @ E[h] - Ex(G.mul(g, h)) @ V[g]), True)
    rep.add(Check.residual_check("prep.covariant_e", "V_g E_h = E_gh V_g", r, tol, witness=w))
    r, w = _worst(pairs, lambda g, h: n2(E[g] @ E[h] - E[h] @ E[g]), True)
    rep.add(Check.residual_check("prep.commute", "E_g E_h = E_h E_g", r, tol, witness=w))
    r, w = _worst(win, lambda g: n2(V[g] @ V[G.inv(g)] @ V[g] - V[g]))
    rep.add(Check.residual_check("prep.pisometry", "V_g V_g^-1 V_g = V_g", r, tol, witness=w))
    return rep


def _multiplicative_on(alg: FdAlgebra, Vmap: LinMap, R: Subspace) -> float:
    worst = 0.0
    for q in R.Q.T:
        r = alg.unvec(q)
        Vr = Vmap(r)
        for b in alg.basis:
            Vb = Vmap(b)
            worst = max(worst, op_norm(Vmap(r @ b) - Vr @ Vb), op_norm(Vmap(b @ r) - Vb @ Vr))
    return worst


def verify_interaction(ig: InteractionGroup, g, tol: float = TOL, seed: int = 0) -> Report:
    """Positivity, unitality and multiplicativity on the range for one ``g``.

    Multiplicativity is bilinear, so it is checked on an orthonormal basis of
    ``R_{g^-1}`` against the matrix-unit basis of ``A`` (both orders).
    """
    G, alg = ig.group, ig.alg
    g = G.canon(g)
    gi = G.inv(g)
    Vg = ig.map(g)
    rep = Report(f"interaction axioms for {ig.name} at g={g!r}")
    rep.extend(certify_checks("interaction.map", Vg, tol, seed))
    Rinv = ig.range(gi)
    Rg = ig.range(g)
    rep.add(Check.residual_check("interaction.multiplicative",
                                 "V_g(ab) = V_g(a)V_g(b) when a or b lies in R_g^-1",
                                 _multiplicative_on(alg, Vg, Rinv), tol))
    Einv = ig.expectation(gi)
    back = max((np.linalg.norm(Einv.mat @ q - q) for q in Rinv.Q.T), default=0.0)
    rep.add(Check.residual_check("interaction.restricted_iso",
                                 "V_g^-1 V_g is the identity on R_g^-1", back, tol))
    img = Subspace.range_of(Vg.mat @ Rinv.Q) if Rinv.dim else Subspace.zero(alg.d)
    mism = Rg.distance(img) if img.dim == Rg.dim else 1.0
    rep.add(Check.residual_check("interaction.range_onto", "V_g maps R_g^-1 onto R_g", mism, max(tol, 1e-8),
                                 witness={"dim_R_g": Rg.dim, "dim_image": img.dim}))
    star = max((op_norm(Vg(alg.unvec(q).conj().T) - Vg(alg.unvec(q)).conj().T) for q in Rinv.Q.T),
               default=0.0)
    rep.add(Check.residual_check("interaction.star", "V_g(a*) = V_g(a)* on R_g^-1", star, tol))
    return rep


def check_nondegenerate(ig: InteractionGroup, g, tol: float = TOL) -> bool | None:
    """Faithfulness of ``E_g``; ``None`` when ``E_g`` is not a conditional expectation."""
    E = ig.expectation(g)
    if not is_conditional_expectation(E, tol):
        return None
    return min_eig(gram_matrix(ig.alg, E)) > tol


def nondegenerate_check(ig: InteractionGroup, g, tol: float = TOL) -> Check:
    E = ig.expectation(g)
    applicable = is_conditional_expectation(E, tol)
    gmin = min_eig(gram_matrix(ig.alg, E))
    status = "skipped" if not applicable else ("pass" if gmin > tol else "fail")
    return Check("interaction.nondegenerate", "E_g is a faithful conditional expectation", status,
                 tol=tol, witness={"g": g, "gram_min_eig": gmin})


def word_map(ig: InteractionGroup, word) -> LinMap:
    word = check_word(ig.group, word)
    out = LinMap.identity(ig.alg)
    for g in word:
        out = out @ ig.map(g)
    return out


def word_expectation(ig: InteractionGroup, word) -> LinMap:
    return word_map(ig, word) @ word_map(ig, word_inverse(ig.group, word))


def range_of(ig: InteractionGroup, word) -> Subspace:
    return word_expectation(ig, word).range()


def set_expectation(ig: InteractionGroup, X: Iterable) -> LinMap:
    out = LinMap.identity(ig.alg)
    for g in sorted({ig.group.canon(x) for x in X}):
        out = out @ ig.expectation(g)
    return out


def check_word_ranges(ig: InteractionGroup, word, tol: float = TOL) -> Report:
    G = ig.group
    word = check_word(G, word)
    rep = Report(f"ranges of the word {word!r}")
    Ea = word_expectation(ig, word)
    Ra = word_map(ig, word).range()
    inter = Subspace.full(ig.alg.d)
    for h in word_mu(G, word) - {G.identity}:
        inter = inter.intersect(ig.range(h))
    dist = inter.distance(Ra) if inter.dim == Ra.dim else 1.0
    rep.add(Check.residual_check("word.range_intersection", "R_a = intersection of R_h over mu(a)",
                                 dist, 1e-8, witness={"word": word, "dim": Ra.dim, "dim_int": inter.dim}))
    prod = set_expectation(ig, word_mu(G, word))
    rep.add(Check.residual_check("word.expectation_product", "V_a V_a^-1 = product of E_h over mu(a)",
                                 np.linalg.norm(Ea.mat - prod.mat, 2), tol, witness={"word": word}))
    return rep


def check_word_interaction(ig: InteractionGroup, word, tol: float = TOL) -> Report:
    G = ig.group
    word = check_word(G, word)
    Va = word_map(ig, word)
    Vai = word_map(ig, word_inverse(G, word))
    rep = Report(f"word interaction {word!r}")
    rep.add(Check.residual_check("word.pisometry", "V_a V_a^-1 V_a = V_a",
                                 np.linalg.norm(Va.mat @ Vai.mat @ Va.mat - Va.mat, 2), tol,
                                 witness={"word": word}))
    rep.add(Check.residual_check("word.pisometry_inv", "V_a^-1 V_a V_a^-1 = V_a^-1",
                                 np.linalg.norm(Vai.mat @ Va.mat @ Vai.mat - Vai.mat, 2), tol,
                                 witness={"word": word}))
    R = (Vai @ Va).range()
    rep.add(Check.residual_check("word.multiplicative", "V_a multiplicative against R_a^-1",
                                 _multiplicative_on(ig.alg, Va, R), tol, witness={"word": word}))
    return rep


def schwarz_check(ig: InteractionGroup, g, tol: float = TOL, samples: int = 100, seed: int = 0) -> Check:
    alg = ig.alg
    Vg = ig.map(g)
    rng = np.random.default_rng(seed)
    cands = [alg.unit] + list(alg.basis) + [alg.random(rng) for _ in range(samples)]
    worst, where = np.inf, None
    for k, a in enumerate(cands):
        Va = Vg(a)
        m = min_eig(Vg(a.conj().T @ a) - Va.conj().T @ Va)
        if m < worst:
            worst, where = m, k
    return Check.residual_check("interaction.schwarz", "V_g(a*a) - V_g(a)*V_g(a) >= 0",
                                max(0.0, -worst), tol, witness={"g": g, "min_eig": worst, "sample": where})


def check_expectation_X(ig: InteractionGroup, X: Iterable, window=None, tol: float = TOL,
                        max_orders: int = 24, seed: int = 0) -> Report:
    G = ig.group
    X = sorted({G.canon(x) for x in X})
    if not X:
        raise ValueError("X must be non-empty")
    rep = Report(f"expectation E_X for X={X!r}")
    EX = set_expectation(ig, X)
    orders = list(itertools.permutations(X)) if len(X) <= 4 else None
    if orders is None:
        rng = np.random.default_rng(seed)
        orders = [tuple(rng.permutation(X).tolist()) for _ in range(max_orders)]
    worst = 0.0
    for order in orders[:max_orders]:
        M = np.eye(ig.alg.d)
        for g in order:
            M = M @ ig.expectation(g).mat
        worst = max(worst, float(np.linalg.norm(M - EX.mat, 2)))
    rep.add(Check.residual_check("ex.order_independent", "E_X independent of factor order", worst, tol))
    RX = EX.range()
    win = _window(ig, window)
    worst_in, worst_eq, where = 0.0, 0.0, None
    for g in win:
        gX = [G.mul(g, x) for x in X]
        RgX = set_expectation(ig, gX).range()
        img = Subspace.range_of(ig.map(g).mat @ RX.Q) if RX.dim else Subspace.zero(ig.alg.d)
        res = RgX.containment_residual(img)
        if res > worst_in:
            worst_in, where = res, g
        if G.identity in X:
            eq = RgX.distance(img) if RgX.dim == img.dim else 1.0
            worst_eq = max(worst_eq, eq)
    rep.add(Check.residual_check("ex.translate", "V_g(R_X) within R_gX", worst_in, 1e-8, witness=where))
    if G.identity in X:
        rep.add(Check.residual_check("ex.translate_onto", "V_g(R_X) = R_gX when 1 in X", worst_eq, 1e-8))
    rep.data["dim_R_X"] = RX.dim
    return rep


def full_interaction_report(ig: InteractionGroup, window=None, tol: float = TOL,
                            word_length: int = 3, seed: int = 0) -> Report:
    """Every interaction-level check over a window, collected in one report."""
    from .groups import words

    win = _window(ig, window)
    rep = Report(f"interaction group {ig.name}")
    rep.extend(verify_partial_rep(ig, win, tol))
    for g in win:
        rep.extend(verify_interaction(ig, g, tol, seed))
        rep.add(nondegenerate_check(ig, g, tol))
        rep.add(schwarz_check(ig, g, tol, seed=seed))
    letters = [g for g in win if g != ig.group.identity] if ig.group.finite else \
        [g for g in win if g != ig.group.identity and _length(ig.group, g) == 1]
    for w in words(letters, word_length, 1):
        rep.extend(check_word_interaction(ig, w, tol))
        rep.extend(check_word_ranges(ig, w, tol))
    return rep


def _length(G: Group, g) -> int:
    if isinstance(G, FreeAbelianGroup):
        return sum(abs(c) for c in G.coords(g))
    return 0 if g == G.identity else 1
