"""Extending semigroup actions with transfer operators to interaction groups.

The input is a subsemigroup ``P`` of ``G`` (here ``N^k`` inside ``Z^k``) with
unital endomorphisms ``alpha_p`` and transfer operators ``ell_p``.  An
extension exists iff the expectations ``alpha_p ell_p`` pairwise commute; it is
then ``V_g = ell_x alpha_y`` for any factorisation ``g = x^-1 y``.

In finite dimensions a unital injective endomorphism is an automorphism, so
every single-endomorphism input here is invertible.  Genuinely
non-invertible dynamics only enter through the fermionic example.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .algebra import TOL, AlgState, FdAlgebra, LinMap, certify_checks, cond_exp_check, op_norm
from .groups import FreeAbelianGroup
from .interaction import InteractionGroup, full_interaction_report, verify_interaction, verify_partial_rep
from .report import FINDING, PASS, SKIPPED, Check, Report


def homomorphism_residual(alpha: LinMap) -> float:
    alg = alpha.alg
    worst = op_norm(alpha(alg.unit) - alg.unit)
    for a in alg.basis:
        Aa = alpha(a)
        worst = max(worst, op_norm(alpha(a.conj().T) - Aa.conj().T))
        for b in alg.basis:
            worst = max(worst, op_norm(alpha(a @ b) - Aa @ alpha(b)))
    return worst


def check_transfer(alpha: LinMap, ell: LinMap, tol: float = TOL, prefix: str = "transfer") -> Report:
    alg = alpha.alg
    rep = Report("transfer operator")
    law = max(op_norm(ell(a @ alpha(b)) - ell(a) @ b) for a in alg.basis for b in alg.basis)
    rep.add(Check.residual_check(f"{prefix}.law", "ell(a alpha(b)) = ell(a) b", law, tol))
    rep.add(Check.residual_check(f"{prefix}.left_inverse", "ell o alpha = id",
                                 np.linalg.norm(ell.mat @ alpha.mat - np.eye(alg.d), 2), tol))
    rep.extend(certify_checks(f"{prefix}.map", ell, tol))
    return rep


@dataclass
class SemigroupSystem:
    """``(alpha, ell)`` on ``P = N^k`` generated by maps on the unit vectors."""

    group: FreeAbelianGroup
    alg: FdAlgebra
    endos: dict
    transfers: dict
    _cache: dict = field(default_factory=dict, repr=False)

    def in_P(self, g) -> bool:
        return all(c >= 0 for c in self.group.coords(g))

    def p_elements(self, radius: int) -> list:
        pts = itertools.product(range(radius + 1), repeat=self.group.rank)
        return [self.group.from_coords(p) for p in pts]

    def length(self, g) -> int:
        return sum(abs(c) for c in self.group.coords(g))

    def _compose(self, gens: dict, p, reverse: bool) -> LinMap:
        out = LinMap.identity(self.alg)
        coords = list(enumerate(self.group.coords(p)))
        if reverse:
            coords.reverse()
        for i, c in coords:
            if c:
                out = out @ gens[i].power(c)
        return out

    def endo(self, p) -> LinMap:
        key = ("a", p)
        if key not in self._cache:
            if not self.in_P(p):
                raise ValueError(f"{p!r} is not in P")
            self._cache[key] = self._compose(self.endos, p, False)
        return self._cache[key]

    def transfer(self, p) -> LinMap:
        key = ("l", p)
        if key not in self._cache:
            if not self.in_P(p):
                raise ValueError(f"{p!r} is not in P")
            # ell_g ell_h = ell_hg: the composition order is reversed
            self._cache[key] = self._compose(self.transfers, p, True)
        return self._cache[key]


def free_abelian_system(alg: FdAlgebra, alphas: Sequence[LinMap], ells: Sequence[LinMap]) -> SemigroupSystem:
    if len(alphas) != len(ells) or not alphas:
        raise ValueError("need one transfer operator per endomorphism")
    G = FreeAbelianGroup(len(alphas))
    return SemigroupSystem(G, alg, dict(enumerate(alphas)), dict(enumerate(ells)))


def verify_system(sys: SemigroupSystem, radius: int = 2, tol: float = TOL) -> Report:
    G = sys.group
    rep = Report("semigroup system")
    P = sys.p_elements(radius)
    hom = max(homomorphism_residual(sys.endo(p)) for p in P)
    rep.add(Check.residual_check("system.alpha_hom", "alpha_p is a unital *-homomorphism", hom, tol))
    inv = max(np.linalg.norm(sys.transfer(p).mat @ sys.endo(p).mat - np.eye(sys.alg.d), 2) for p in P)
    rep.add(Check.residual_check("system.left_inverse", "ell_p o alpha_p = id", inv, tol))
    unital = max(op_norm(sys.transfer(p)(sys.alg.unit) - sys.alg.unit) for p in P)
    rep.add(Check.residual_check("system.ell_unital", "ell_p(1) = 1", unital, tol))
    ca = cl = 0.0
    for p in P:
        for q in P:
            pq = G.mul(p, q)
            ca = max(ca, np.linalg.norm(sys.endo(p).mat @ sys.endo(q).mat - sys.endo(pq).mat, 2))
            cl = max(cl, np.linalg.norm(sys.transfer(p).mat @ sys.transfer(q).mat - sys.transfer(G.mul(q, p)).mat, 2))
    rep.add(Check.residual_check("system.alpha_action", "alpha_p alpha_q = alpha_pq", ca, tol))
    rep.add(Check.residual_check("system.ell_action", "ell_p ell_q = ell_qp", cl, tol))
    for i in sys.endos:
        rep.extend(check_transfer(sys.endos[i], sys.transfers[i], tol, prefix="system.transfer"))
    return rep


def commuting_expectations(maps: Mapping, tol: float = TOL) -> tuple[bool, tuple | None, float]:
    """Whether all given maps pairwise commute; first violating pair as witness."""
    keys = list(maps)
    worst, witness = 0.0, None
    for i, g in enumerate(keys):
        for h in keys[i + 1:]:
            A, B = maps[g].mat, maps[h].mat
            r = float(np.linalg.norm(A @ B - B @ A, 2))
            if r > worst:
                worst = r
            if r > tol and witness is None:
                witness = (g, h)
    return witness is None, witness, worst


def extension_exists(sys: SemigroupSystem, radius: int = 2, tol: float = TOL) -> tuple[bool, tuple | None, float]:
    maps = {p: sys.endo(p) @ sys.transfer(p) for p in sys.p_elements(radius) if p != sys.group.identity}
    return commuting_expectations(maps, tol)


def factorizations(sys: SemigroupSystem, g, radius: int, limit: int = 3) -> list[tuple]:
    """Pairs ``(x, y)`` in ``P`` with ``g = -x + y``, shortest first."""
    G = sys.group
    out = []
    for x in sys.p_elements(radius):
        y = G.mul(x, g)
        if sys.in_P(y) and sys.length(y) <= radius * G.rank:
            out.append((sys.length(x) + sys.length(y), x, y))
    out.sort(key=lambda t: (t[0], G.coords(t[1])))
    return [(x, y) for _, x, y in out[:limit]]


@dataclass
class Construction:
    ig: InteractionGroup
    report: Report


def construct_V(sys: SemigroupSystem, radius: int = 2, tol: float = TOL) -> Construction:
    G = sys.group
    rep = Report("extension V_g = ell_x alpha_y")
    ok, witness, worst = extension_exists(sys, radius + 1, tol)
    rep.add(Check.residual_check("extension.commuting", "alpha_p ell_p pairwise commute", worst, tol,
                                 witness=witness))
    if not ok:
        raise ValueError(f"no extension: alpha ell fails to commute for {witness!r}")

    def rule(g):
        x, y = factorizations(sys, g, max(sys.length(g), 1) + 1, 1)[0]
        return sys.transfer(x) @ sys.endo(y)

    ig = InteractionGroup(G, sys.alg, rule=rule, name="extension")
    worst_f, compared = 0.0, 0
    for g in G.window(radius):
        fs = factorizations(sys, g, sys.length(g) + 2)
        maps = [sys.transfer(x) @ sys.endo(y) for x, y in fs]
        for M in maps[1:]:
            compared += 1
            worst_f = max(worst_f, maps[0].dist(M))
    rep.add(Check.residual_check("extension.well_defined", "ell_x alpha_y independent of the factorization",
                                 worst_f, tol, witness={"comparisons": compared}))
    onP = max(float(np.max(np.abs(ig.map(p).mat - sys.endo(p).mat))) for p in sys.p_elements(radius))
    offP = max(float(np.max(np.abs(ig.map(G.inv(p)).mat - sys.transfer(p).mat))) for p in sys.p_elements(radius))
    rep.add(Check.residual_check("extension.restricts_alpha", "V_p = alpha_p on P", onP, 0.0))
    rep.add(Check.residual_check("extension.restricts_ell", "V_p^-1 = ell_p on P", offP, 0.0))
    expct = {p: ig.expectation(p) for p in sys.p_elements(radius)}
    e_vs = max(expct[p].dist(sys.endo(p) @ sys.transfer(p)) for p in expct)
    rep.add(Check.residual_check("extension.expectations", "E_p = alpha_p ell_p", e_vs, tol))
    rep.extend(full_interaction_report(ig, radius, tol, word_length=2))
    return Construction(ig, rep)


def linear_order_extension(alg: FdAlgebra, alpha: LinMap, ell: LinMap) -> InteractionGroup:
    """``Z`` with ``P = N``: ``V_n = alpha^n`` for ``n >= 0`` and ``ell^-n`` otherwise."""
    Z = FreeAbelianGroup(1)

    def rule(n):
        return alpha.power(n) if n >= 0 else ell.power(-n)

    return InteractionGroup(Z, alg, rule=rule, name="linear_order")


# --------------------------------------------------------------------------
# a single endomorphism with a conditional expectation

def single_endo_extend(alpha: LinMap, E: LinMap, window: int = 5, tol: float = TOL) -> Construction:
    alg = alpha.alg
    rep = Report("single endomorphism extension")
    hom = homomorphism_residual(alpha)
    rep.add(Check.residual_check("endo.homomorphism", "alpha is a unital *-homomorphism", hom, tol))
    rank = int(np.linalg.matrix_rank(alpha.mat, tol=1e-9))
    if hom > tol:
        raise ValueError(f"alpha is not a unital *-homomorphism (residual {hom:.3e})")
    if rank < alg.d:
        raise ValueError(f"alpha is not injective (rank {rank} < {alg.d})")
    rep.add(Check("endo.automorphism", "unital injective endomorphism of a finite-dimensional algebra is onto",
                  PASS, witness={"rank": rank, "dim": alg.d}))
    ce = cond_exp_check(E, tol, prefix="endo.E")
    rep.extend(ce)
    Ralpha = alpha.range()
    RE = E.range()
    if not (Ralpha.dim == RE.dim and Ralpha.equals(RE)):
        raise ValueError("range of E differs from the range of alpha")
    # alpha(L(a)) = E(a), unique since alpha is injective
    L_mat, *_ = np.linalg.lstsq(alpha.mat, E.mat, rcond=None)
    L = LinMap(alg, L_mat)
    rep.add(Check.residual_check("endo.solve", "alpha o L = E", np.linalg.norm(alpha.mat @ L_mat - E.mat, 2), tol))
    rep.extend(check_transfer(alpha, L, tol, prefix="endo.transfer"))
    ig = linear_order_extension(alg, alpha, L)
    ig.name = "single_endo"
    rep.add(Check.residual_check("endo.recovers_E", "V_1 V_-1 = E", ig.expectation(1).dist(E), tol))
    rep.extend(verify_partial_rep(ig, window, tol))
    for g in ig.window(window):
        rep.extend(verify_interaction(ig, g, tol))
    return Construction(ig, rep)


def _invariant(ig: InteractionGroup, state: AlgState, window: int, tol: float) -> bool:
    w = state.functional
    return all(np.linalg.norm(w @ ig.map(g).mat - w) <= tol for g in ig.window(window))


def uniqueness_check(V: InteractionGroup, Vp: InteractionGroup, state: AlgState, window: int = 5,
                     tol: float = TOL) -> Report:
    """Compare two extensions of one ``N``-action on a window of ``Z``."""
    rep = Report("uniqueness of the extension")
    for ig in (V, Vp):
        tr = check_transfer(ig.map(1), ig.map(-1), tol)
        if not tr.ok:
            rep.add(Check("uniqueness.compare", "V = V' on the window", SKIPPED,
                          witness={"reason": f"{ig.name}: V_-1 is not a transfer operator for V_1",
                                   "failed": [c.id for c in tr.failures]}))
            return rep
    agree = max(V.map(n).dist(Vp.map(n)) for n in range(window + 1))
    if agree > tol:
        rep.add(Check("uniqueness.compare", "V = V' on the window", SKIPPED,
                      witness={"reason": "candidates differ on P", "residual": agree}))
        return rep
    if not (state.is_faithful(tol) and _invariant(V, state, window, 1e-8) and _invariant(Vp, state, window, 1e-8)):
        rep.add(Check("uniqueness.compare", "V = V' on the window", SKIPPED,
                      witness={"reason": "state is not faithful and invariant for both"}))
        return rep
    diff = max(V.map(n).dist(Vp.map(n)) for n in range(-window, window + 1))
    rep.add(Check("uniqueness.compare", "V = V' on the window", PASS if diff <= tol else FINDING,
                  residual=diff, tol=tol))
    # rebuild from (V_1, V_1 V_-1) via the inverse-or-transfer table
    E = V.expectation(1)
    L_mat, *_ = np.linalg.lstsq(V.map(1).mat, E.mat, rcond=None)
    rebuilt = linear_order_extension(V.alg, V.map(1), LinMap(V.alg, L_mat))
    re = max(rebuilt.map(n).dist(V.map(n)) for n in range(-window, window + 1))
    rep.add(Check.residual_check("uniqueness.rebuild", "V is the table built from V_1 and V_1 V_-1", re, tol))
    return rep
