"""Concrete covariant representations ``(pi, v)`` and what is built from them.

A :class:`CovariantRep` stores ``pi`` on the matrix-unit basis of ``A`` and
``v`` on a set of group elements, all as ``m x m`` matrices on a
finite-dimensional Hilbert space.  From it we build the operator spaces
``Z_a``, ``M_a`` and ``K_a`` of a word, detect redundancies, amplify by the
left regular representation of a finite group, and grade the generated
algebra.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .algebra import (NORM_TOL, TOL, AlgState, LinMap, Subspace, generated_star_algebra, min_eig,
                      op_norm)
from .groups import FreeAbelianGroup, check_word, word_dot, word_inverse, word_mu, words
from .interaction import InteractionGroup, range_of, word_map
from .report import FINDING, PASS, Check, Report

SUBSPACE_TOL = 1e-8
GAP = 1e-6


@dataclass(eq=False)
class CovariantRep:
    ig: InteractionGroup
    alg_images: np.ndarray  # (d, m, m): pi of each matrix unit
    isometries: dict
    cyclic: np.ndarray | None = None
    label: str = "rep"
    isometry_rule: Callable | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alg_images = np.asarray(self.alg_images, dtype=complex)
        d, m, m2 = self.alg_images.shape
        if d != self.ig.alg.d or m != m2:
            raise ValueError("alg_images must have shape (dim A, m, m)")
        G = self.ig.group
        self.isometries = {G.canon(g): np.asarray(x, dtype=complex) for g, x in self.isometries.items()}
        self.isometries.setdefault(G.identity, np.eye(m, dtype=complex))

    @property
    def dim(self) -> int:
        return self.alg_images.shape[1]

    def image(self, a) -> np.ndarray:
        return np.tensordot(self.ig.alg.vec(a), self.alg_images, axes=1)

    def isometry(self, g) -> np.ndarray:
        g = self.ig.group.canon(g)
        hit = self.isometries.get(g)
        if hit is None:
            if self.isometry_rule is None:
                raise KeyError(f"representation has no v for {g!r}")
            hit = self.isometries[g] = np.asarray(self.isometry_rule(g), dtype=complex)
        return hit

    def word_isometry(self, word) -> np.ndarray:
        out = np.eye(self.dim, dtype=complex)
        for g in check_word(self.ig.group, word):
            out = out @ self.isometry(g)
        return out

    def image_span(self) -> Subspace:
        m = self.dim
        return Subspace.span(list(self.alg_images), ambient=m * m, shape=(m, m))

    def letters(self) -> list:
        G = self.ig.group
        if G.finite:
            return [g for g in G.window() if g != G.identity]
        return G.generators()


def _similar(W: np.ndarray, Winv: np.ndarray, M: np.ndarray, scalar: bool) -> np.ndarray:
    return M.astype(complex) if scalar else W @ M @ Winv


def hilbert_rep_from_functional(ig: InteractionGroup, w: np.ndarray, label: str = "gns",
                                window=None) -> CovariantRep:
    """Left multiplication and ``V_g`` on ``(A, <a, b> = w . vec(a* b))`` in orthonormal coordinates."""
    alg = ig.alg
    G = ig.group
    gram = np.array([[w @ alg.vec(bi.conj().T @ bj) for bj in alg.basis] for bi in alg.basis])
    gram = (gram + gram.conj().T) / 2
    if min_eig(gram) <= TOL:
        raise ValueError("functional is not faithful")
    # scalar Gram: the similarity is the identity, skip it so no rounding enters
    scalar = np.array_equal(gram, gram[0, 0] * np.eye(alg.d))
    if scalar:
        W = np.sqrt(gram[0, 0].real) * np.eye(alg.d)
        Winv = np.eye(alg.d) / np.sqrt(gram[0, 0].real)
    else:
        vals, U = np.linalg.eigh(gram)
        W = U @ np.diag(np.sqrt(vals)) @ U.conj().T
        Winv = U @ np.diag(1 / np.sqrt(vals)) @ U.conj().T
    pi_b = np.array([_similar(W, Winv, alg.left_mult(b), scalar) for b in alg.basis])
    if G.finite:
        elems = G.window()
    else:
        elems = ig.window(window)
    v = {g: _similar(W, Winv, ig.map(g).mat, scalar) for g in elems}
    rule = None if G.finite else (lambda g: _similar(W, Winv, ig.map(g).mat, scalar))
    xi = W @ alg.unit_vec if not scalar else alg.unit_vec * np.sqrt(gram[0, 0].real)
    return CovariantRep(ig, pi_b, v, cyclic=xi, label=label, isometry_rule=rule,
                        meta={"gram_scalar": bool(scalar), "gram_min_eig": min_eig(gram)})


class StateRejected(ValueError):
    def __init__(self, message: str, element=None, witness=None):
        super().__init__(message)
        self.element = element
        self.witness = witness


def state_invariance(ig: InteractionGroup, state: AlgState, window=None) -> dict:
    """Trace-norm defect ``|phi o V_g - phi|`` per window element, with the worst matrix unit."""
    alg = ig.alg
    w = state.functional
    out = {}
    for g in ig.window(window):
        wg = w @ ig.map(g).mat
        rho_g = alg.unvec(wg).T
        defect = float(np.abs(np.linalg.eigvalsh((rho_g - state.rho + (rho_g - state.rho).conj().T) / 2)).sum())
        diffs = np.abs(wg - w)
        k = int(np.argmax(diffs))
        out[g] = {"defect": defect, "basis_index": k, "phi_Vg": complex(wg[k]), "phi": complex(w[k])}
    return out


def gns_from_state(ig: InteractionGroup, state: AlgState, window=None, tol: float = TOL) -> CovariantRep:
    if not state.is_faithful(tol):
        raise StateRejected(f"state is not faithful (min eigenvalue {min_eig(state.rho):.3g})")
    for g, info in state_invariance(ig, state, window).items():
        if info["defect"] > tol:
            k = info["basis_index"]
            raise StateRejected(
                f"state is not invariant under V_{g!r}: phi(V_g(b_{k})) = {info['phi_Vg'].real:.6g} "
                f"but phi(b_{k}) = {info['phi'].real:.6g}", element=g, witness=info)
    return hilbert_rep_from_functional(ig, state.functional, label="gns", window=window)


# --------------------------------------------------------------------------
# verification

def _n(M) -> float:
    return float(np.linalg.norm(M, 2)) if np.size(M) else 0.0


def _words(rep: CovariantRep, max_len: int, min_len: int = 1):
    return words(rep.letters(), max_len, min_len)


def nondegeneracy_check(rep: CovariantRep, max_len: int = 3, gap: float = GAP) -> Check:
    """``a -> pi(a) v_a`` is injective for every word up to ``max_len``."""
    worst, where = np.inf, None
    for w in _words(rep, max_len, 0):
        va = rep.word_isometry(w)
        M = np.column_stack([(P @ va).ravel() for P in rep.alg_images])
        s = np.linalg.svd(M, compute_uv=False)
        if s.min() < worst:
            worst, where = float(s.min()), w
    return Check("rep.nondegenerate", "a -> pi(a) v_a injective on words",
                 PASS if worst > gap else "fail", tol=gap,
                 witness={"min_singular_value": worst, "word": where})


def verify_covariant(rep: CovariantRep, window=None, max_len: int = 3, tol: float = TOL) -> Report:
    ig = rep.ig
    G = ig.group
    alg = ig.alg
    rep_out = Report(f"covariance of {rep.label}")
    I = np.eye(rep.dim)
    P = rep.alg_images
    B = alg.basis
    hom = max(_n(rep.image(bi @ bj) - P[i] @ P[j]) for i, bi in enumerate(B) for j, bj in enumerate(B))
    star = max(_n(rep.image(b.conj().T) - P[i].conj().T) for i, b in enumerate(B))
    rep_out.add(Check.residual_check("rep.pi_unital", "pi(1) = 1", _n(rep.image(alg.unit) - I), tol))
    rep_out.add(Check.residual_check("rep.pi_multiplicative", "pi(ab) = pi(a)pi(b)", hom, tol))
    rep_out.add(Check.residual_check("rep.pi_star", "pi(a*) = pi(a)*", star, tol))
    win = ig.window(window)
    V = {g: rep.isometry(g) for g in win}
    vx = lambda g: V[g] if g in V else rep.isometry(g)
    rep_out.add(Check.residual_check("rep.v_unit", "v_1 = 1", _n(V[G.identity] - I), tol))
    rep_out.add(Check.residual_check("rep.v_star", "v_g* = v_g^-1",
                                     max(_n(V[g].conj().T - V[G.inv(g)]) for g in win), tol))
    pr = max(_n(V[g] @ V[h] @ V[G.inv(h)] - vx(G.mul(g, h)) @ V[G.inv(h)]) for g in win for h in win)
    pl = max(_n(V[G.inv(g)] @ V[g] @ V[h] - V[G.inv(g)] @ vx(G.mul(g, h))) for g in win for h in win)
    rep_out.add(Check.residual_check("rep.v_partial_right", "v_g v_h v_h^-1 = v_gh v_h^-1", pr, tol))
    rep_out.add(Check.residual_check("rep.v_partial_left", "v_g^-1 v_g v_h = v_g^-1 v_gh", pl, tol))
    cov, where = 0.0, None
    for g in win:
        e = V[g] @ V[G.inv(g)]
        Vg = ig.map(g)
        for i, b in enumerate(B):
            r = _n(V[g] @ P[i] @ V[G.inv(g)] - rep.image(Vg(b)) @ e)
            if r > cov:
                cov, where = r, (g, i)
    rep_out.add(Check.residual_check("rep.covariance", "v_g pi(a) v_g^-1 = pi(V_g(a)) v_g v_g^-1",
                                     cov, tol, witness=where))
    wcov, wcomm = 0.0, 0.0
    for w in _words(rep, max_len):
        va = rep.word_isometry(w)
        vai = rep.word_isometry(word_inverse(G, w))
        e = va @ vai
        Va = word_map(ig, w)
        for i, b in enumerate(B):
            wcov = max(wcov, _n(va @ P[i] @ vai - rep.image(Va(b)) @ e))
        for q in range_of(ig, w).Q.T:
            pa = rep.image(alg.unvec(q))
            wcomm = max(wcomm, _n(pa @ e - e @ pa))
    rep_out.add(Check.residual_check("rep.word_covariance", "v_a pi(b) v_a^-1 = pi(V_a(b)) v_a v_a^-1",
                                     wcov, tol, witness={"max_len": max_len}))
    rep_out.add(Check.residual_check("rep.range_commutes", "pi(R_a) commutes with v_a v_a^-1",
                                     wcomm, tol))
    return rep_out


def gns_report(ig: InteractionGroup, state: AlgState, tol: float = TOL, max_len: int = 3) -> tuple:
    rep = gns_from_state(ig, state, tol=tol)
    out = Report("GNS representation")
    xi = rep.cyclic
    fixed = max(float(np.linalg.norm(rep.isometry(g) @ xi - xi)) for g in ig.window())
    out.add(Check.residual_check("gns.fixes_cyclic", "v_g xi = xi", fixed, 0.0 if rep.meta["gram_scalar"] else tol,
                                 witness={"exact_arithmetic": rep.meta["gram_scalar"]}))
    # pi(a) xi spans the space
    cyc = np.column_stack([P @ xi for P in rep.alg_images])
    out.add(Check.flag("gns.cyclic", "pi(A) xi spans H", np.linalg.matrix_rank(cyc) == rep.dim))
    out.extend(verify_covariant(rep, max_len=max_len, tol=tol))
    out.add(nondegeneracy_check(rep, max_len))
    return rep, out


# --------------------------------------------------------------------------
# subspaces Z, M, K

def _mspan(mats, m: int) -> Subspace:
    return Subspace.span(list(mats), ambient=m * m, shape=(m, m), abs_cut=1e-9) if len(mats) else \
        Subspace.zero(m * m, (m, m))


def _times(S: Subspace, right: Sequence[np.ndarray]) -> list[np.ndarray]:
    return [X @ R for X in S.matrices() for R in right]


def word_span(rep: CovariantRep, word) -> Subspace:
    m = rep.dim
    S = rep.image_span()
    for g in check_word(rep.ig.group, word):
        vg = rep.isometry(g)
        S = Subspace.zero(m * m, (m, m)).extend(_times(S, [vg @ P for P in rep.alg_images]), abs_cut=1e-9)
    return S


def word_range_span(rep: CovariantRep, word) -> Subspace:
    va = rep.word_isometry(word)
    m = rep.dim
    return Subspace.zero(m * m, (m, m)).extend(
        [Pa @ va @ Pb for Pa in rep.alg_images for Pb in rep.alg_images], abs_cut=1e-9)


@dataclass
class WalkAlgebra:
    space: Subspace
    stable_length: int
    truncation: int
    stable: bool


def walk_algebra(rep: CovariantRep, X, max_length: int | None = None) -> WalkAlgebra:
    """Sum of ``Z_b`` over closed words ``b`` whose prefix products stay in ``X``.

    Such words are walks ``1 = x0, x1, ..., xn = 1`` inside ``X`` with letters
    ``x_{k-1}^-1 x_k``; spans are accumulated per endpoint until they stop
    growing.
    """
    G = rep.ig.group
    X = sorted({G.canon(x) for x in X} | {G.identity})
    m = rep.dim
    zero = Subspace.zero(m * m, (m, m))
    U = {x: zero for x in X}
    U[G.identity] = rep.image_span()
    truncation = len(X) + 2 if max_length is None else max_length
    cap = max(4 * truncation, 16)
    unchanged = 0
    length = 0
    for length in range(1, cap + 1):
        new = {}
        grew = False
        for y in X:
            S = U[y]
            for x in X:
                if U[x].dim == 0:
                    continue
                step = rep.isometry(G.mul(G.inv(x), y))
                S = S.extend(_times(U[x], [step @ P for P in rep.alg_images]), abs_cut=1e-9)
            grew |= S.dim > U[y].dim
            new[y] = S
        U = new
        unchanged = 0 if grew else unchanged + 1
        if unchanged >= 2:
            break
    stable_at = length - unchanged
    return WalkAlgebra(U[G.identity], stable_at, truncation, unchanged >= 2)


def product_containment(A: Subspace, B: Subspace, C: Subspace) -> float:
    """Largest relative distance from ``C`` of products ``a b``."""
    worst = 0.0
    for a in A.matrices():
        for b in B.matrices():
            worst = max(worst, C.residual((a @ b).ravel()))
    return worst


def star_closed(S: Subspace) -> float:
    return max((S.residual(x.conj().T.ravel()) for x in S.matrices()), default=0.0)


@dataclass
class RepSubspaces:
    word: tuple
    span: Subspace
    range_span: Subspace
    algebra: WalkAlgebra


def build_subspaces(rep: CovariantRep, word, max_length: int | None = None) -> RepSubspaces:
    G = rep.ig.group
    word = check_word(G, word)
    K = walk_algebra(rep, word_mu(G, word), max_length)
    return RepSubspaces(word, word_span(rep, word), word_range_span(rep, word), K)


def subspace_report(rep: CovariantRep, max_len: int = 2, tol: float = SUBSPACE_TOL) -> Report:
    G = rep.ig.group
    out = Report(f"operator spaces of {rep.label}")
    empty = word_span(rep, ())
    out.add(Check.residual_check("spaces.empty_word", "Z of the empty word is pi(A)",
                                 empty.distance(rep.image_span()), tol))
    ws = list(_words(rep, max_len))
    subs = {w: build_subspaces(rep, w) for w in ws}
    mz = max(s.span.containment_residual(s.range_span) for s in subs.values())
    out.add(Check.residual_check("spaces.m_in_z", "M_a within Z_a", mz, tol))
    kmm = max(product_containment(s.algebra.space, s.range_span, s.range_span) for s in subs.values())
    out.add(Check.residual_check("spaces.k_acts_on_m", "K_a M_a within M_a", kmm, tol))
    kalg = max(max(star_closed(s.algebra.space), product_containment(s.algebra.space, s.algebra.space, s.algebra.space))
               for s in subs.values())
    out.add(Check.residual_check("spaces.k_algebra", "K_a is a *-algebra", kalg, tol))
    unstable = [w for w, s in subs.items() if not s.algebra.stable]
    out.add(Check.flag("spaces.k_stable", "K_a stabilised under word-length growth", not unstable,
                       witness={"unstable": unstable,
                                "stable_lengths": {str(w): s.algebra.stable_length for w, s in subs.items()}}))
    zm, pairs = 0.0, 0
    for a in ws:
        Za = subs[a].span
        mu_ai = word_mu(G, word_inverse(G, a))
        for b in ws:
            if mu_ai <= word_mu(G, b):
                pairs += 1
                zm = max(zm, product_containment(Za, subs[b].range_span, word_range_span(rep, a + b)))
    out.add(Check.residual_check("spaces.z_m_product", "Z_a M_b within M_ab when mu(a^-1) in mu(b)",
                                 zm, tol, witness={"pairs": pairs}))
    out.data["dims"] = {str(w): {"Z": s.span.dim, "M": s.range_span.dim, "K": s.algebra.space.dim} for w, s in subs.items()}
    return out


# --------------------------------------------------------------------------
# redundancies

@dataclass
class RedundancyReport:
    word: tuple
    kernel_dim: int
    min_singular: float
    basis: list
    k_dim: int
    m_dim: int

    @property
    def zero(self) -> bool:
        return self.kernel_dim == 0


def find_redundancies(rep: CovariantRep, word, subs: RepSubspaces | None = None,
                      gap: float = GAP) -> RedundancyReport:
    subs = subs or build_subspaces(rep, word)
    K = subs.algebra.space.matrices()
    Ms = subs.range_span.matrices()
    if not K:
        return RedundancyReport(subs.word, 0, np.inf, [], 0, len(Ms))
    cols = [np.concatenate([(k @ mj).ravel() for mj in Ms]) if Ms else np.zeros(1) for k in K]
    A = np.column_stack(cols)
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    s_full = np.zeros(len(K))
    s_full[:s.size] = s
    null = Vh.conj().T[:, s_full <= gap]
    basis = [sum(c * k for c, k in zip(col, K)) for col in null.T]
    return RedundancyReport(subs.word, null.shape[1], float(s_full.min()), basis, len(K), len(Ms))


def redundancy_scan(rep: CovariantRep, max_mu: int = 3, max_len: int | None = None,
                    expect_zero: bool = True) -> Report:
    """Redundancy kernels for all words with ``|mu(a)| <= max_mu``.

    Words are enumerated up to length ``max_mu - 1`` (longer words repeat
    prefix products, so they only reach sets already listed); the scan keeps
    one word per distinct ``mu`` pattern and degree.
    """
    G = rep.ig.group
    max_len = max_mu - 1 if max_len is None else max_len
    out = Report(f"redundancy scan of {rep.label}")
    seen = {}
    for w in _words(rep, max_len, 0):
        mu = word_mu(G, w)
        if len(mu) > max_mu:
            continue
        seen.setdefault((mu, word_dot(G, w)), w)
    results = []
    for w in seen.values():
        results.append(find_redundancies(rep, w))
    worst_dim = max(r.kernel_dim for r in results)
    gap = min(r.min_singular for r in results)
    data = [{"word": r.word, "kernel_dim": r.kernel_dim, "min_singular": r.min_singular,
             "K_dim": r.k_dim, "M_dim": r.m_dim} for r in results]
    if expect_zero:
        out.add(Check("redundancy.none", "no nonzero k in K_a with k M_a = 0",
                      PASS if worst_dim == 0 and gap > GAP else "fail", tol=GAP,
                      witness={"words": len(results), "min_singular": gap}))
    else:
        out.add(Check("redundancy.found", "redundancies present in a non-strongly-covariant rep",
                      FINDING if worst_dim > 0 else "fail",
                      witness={"max_kernel_dim": worst_dim}))
    out.data["words"] = data
    return out


def corrupted_rep(rep: CovariantRep) -> CovariantRep:
    """``pi + pi`` with ``v_g + 0`` for ``g != 1``: covariant but with redundancies."""
    G = rep.ig.group
    m = rep.dim
    Z = np.zeros((m, m))
    pi_b = np.array([sla.block_diag(P, P) for P in rep.alg_images])
    v = {g: sla.block_diag(x, Z) if g != G.identity else np.eye(2 * m) for g, x in rep.isometries.items()}
    return CovariantRep(rep.ig, pi_b, v, label=f"{rep.label}+corrupted")


# --------------------------------------------------------------------------
# amplification, grading and the concrete crossed product

def left_regular(G, g) -> np.ndarray:
    n = len(G.window())
    L = np.zeros((n, n))
    for h in G.window():
        L[G.mul(g, h), h] = 1
    return L


def amplify(rep: CovariantRep) -> CovariantRep:
    G = rep.ig.group
    if not G.finite:
        raise ValueError("amplification is built for finite groups")
    n = len(G.window())
    pi_b = np.array([np.kron(P, np.eye(n)) for P in rep.alg_images])
    v = {g: np.kron(rep.isometry(g), left_regular(G, g)) for g in G.window()}
    return CovariantRep(rep.ig, pi_b, v, label=f"{rep.label}+amplified", meta={"base_dim": rep.dim})


def graded_components(rep: CovariantRep, cap: int = 64) -> dict:
    """``C_g``: spans of ``pi(a0) v_g1 pi(a1) ... v_gn pi(an)`` with product ``g``."""
    G = rep.ig.group
    m = rep.dim
    zero = Subspace.zero(m * m, (m, m))
    C = {g: zero for g in G.window()}
    C[G.identity] = rep.image_span()
    for _ in range(cap):
        grew = False
        new = {}
        for g in G.window():
            S = C[g]
            for h in G.window():
                if C[h].dim:
                    step = rep.isometry(G.mul(G.inv(h), g))
                    S = S.extend(_times(C[h], [step @ P for P in rep.alg_images]), abs_cut=1e-9)
            grew |= S.dim > C[g].dim
            new[g] = S
        C = new
        if not grew:
            return C
    raise RuntimeError("grading components did not stabilise")


def degree_zero_part(T: np.ndarray, base_dim: int, n: int) -> np.ndarray:
    """Normalized partial trace over the ``l2(G)`` factor, tensored back with the identity."""
    T4 = T.reshape(base_dim, n, base_dim, n)
    return np.kron(np.einsum("ihjh->ij", T4) / n, np.eye(n))


@dataclass
class CrossedProduct:
    rep: CovariantRep
    algebra: Subspace
    components: dict
    report: Report


def crossed_product_concrete(amp: CovariantRep, tol: float = SUBSPACE_TOL, samples: int = 50,
                             seed: int = 0) -> CrossedProduct:
    G = amp.ig.group
    alg = amp.ig.alg
    n = len(G.window())
    base = amp.meta.get("base_dim", amp.dim // n)
    gens = list(amp.alg_images) + [amp.isometry(g) for g in G.window()]
    B = generated_star_algebra(gens)
    C = graded_components(amp)
    out = Report(f"concrete crossed product from {amp.label}")
    out.data["algebra_dim"] = B.dim
    out.data["component_dims"] = {str(g): C[g].dim for g in G.window()}

    total = Subspace.zero(B.ambient, B.shape)
    for g in G.window():
        total = total + C[g]
    out.add(Check.flag("grading.direct_sum", "algebra = direct sum of the C_g",
                       total.dim == B.dim == sum(C[g].dim for g in G.window()) and total.equals(B),
                       witness={"sum_dims": sum(C[g].dim for g in G.window()), "algebra_dim": B.dim}))
    prod = max(product_containment(C[g], C[h], C[G.mul(g, h)]) for g in G.window() for h in G.window())
    out.add(Check.residual_check("grading.product", "C_g C_h within C_gh", prod, tol))
    inv = max(C[G.inv(g)].containment_residual(
        Subspace.span([x.conj().T for x in C[g].matrices()], ambient=B.ambient, shape=B.shape))
        for g in G.window() if C[g].dim)
    out.add(Check.residual_check("grading.involution", "C_g* = C_g^-1", inv, tol))

    F = lambda T: degree_zero_part(T, base, n)
    rng = np.random.default_rng(seed)
    mats = B.matrices()
    rand = [sum(c * x for c, x in zip(rng.standard_normal(B.dim) + 1j * rng.standard_normal(B.dim), mats))
            for _ in range(samples)]
    pool = mats + rand
    idem = max(_n(F(F(T)) - F(T)) for T in pool)
    onto = max(C[G.identity].residual(F(T).ravel()) for T in pool)
    ident = max(_n(F(T) - T) for T in C[G.identity].matrices())
    kill = max((_n(F(T)) for g in G.window() if g != G.identity for T in C[g].matrices()), default=0.0)
    contr = max(max(0.0, _n(F(T)) - _n(T)) for T in pool)
    pos = min(min_eig(F(T.conj().T @ T)) for T in pool)
    out.add(Check.residual_check("grading.F_idempotent", "F o F = F", idem, 1e-10))
    out.add(Check.residual_check("grading.F_onto", "F maps into C_1", onto, tol))
    out.add(Check.residual_check("grading.F_identity", "F = id on C_1", ident, 1e-10))
    out.add(Check.residual_check("grading.F_vanishes", "F = 0 on C_g for g != 1", kill, 1e-10))
    out.add(Check.residual_check("grading.F_contractive", "|F(T)| <= |T|", contr, NORM_TOL))
    out.add(Check.residual_check("grading.F_positive", "F(T*T) >= 0", max(0.0, -pos), TOL))
    J = np.column_stack([P.ravel() for P in amp.alg_images])
    rank = int(np.linalg.matrix_rank(J, tol=1e-9))
    out.add(Check.flag("grading.J_injective", "a -> pi'(a) has rank dim A", rank == alg.d,
                       witness={"rank": rank, "dim_A": alg.d}))
    redundant = [g for g in G.window() if C[g].dim == 0]
    out.data["empty_components"] = redundant
    return CrossedProduct(amp, B, C, out)


# --------------------------------------------------------------------------
# norm recipe

def psd_sqrt(M: np.ndarray) -> np.ndarray:
    vals, U = np.linalg.eigh((M + M.conj().T) / 2)
    return U @ np.diag(np.sqrt(np.clip(vals, 0, None))) @ U.conj().T


def _block(alg, fn, n: int) -> np.ndarray:
    N = alg.n
    out = np.zeros((n * N, n * N), dtype=complex)
    for i in range(n):
        for j in range(n):
            out[i * N:(i + 1) * N, j * N:(j + 1) * N] = fn(i, j)
    return out


def norm_formula(ig: InteractionGroup, word, a_list, b_list, tol: float = TOL) -> float:
    """Norm of ``sum_i a_i* v_a b_i`` computed from ``V`` alone.

    With ``M = [V_a^-1(a_i a_j*)]`` factor ``M = c* c``, put
    ``d_k = sum_j c_kj b_j`` and return ``|[V_a(d_i d_j*)]|^(1/2)``.
    """
    G = ig.group
    alg = ig.alg
    word = check_word(G, word)
    n = len(a_list)
    if len(b_list) != n or n == 0:
        raise ValueError("need equally many a_i and b_i")
    Va = word_map(ig, word)
    Vai = word_map(ig, word_inverse(G, word))
    M = _block(alg, lambda i, j: Vai(a_list[i] @ a_list[j].conj().T), n)
    if min_eig(M) < -tol * max(1.0, op_norm(M)):
        raise ValueError(f"matrix [V(a_i a_j*)] is not positive (min eigenvalue {min_eig(M):.3g})")
    c = psd_sqrt(M)
    N = alg.n
    blk = lambda X, k, j: X[k * N:(k + 1) * N, j * N:(j + 1) * N]
    d = [sum(blk(c, k, j) @ b_list[j] for j in range(n)) for k in range(n)]
    D = _block(alg, lambda i, j: Va(d[i] @ d[j].conj().T), n)
    return float(np.sqrt(max(op_norm(D), 0.0)))


def direct_norm(rep: CovariantRep, word, a_list, b_list) -> float:
    va = rep.word_isometry(word)
    X = sum(rep.image(a).conj().T @ va @ rep.image(b) for a, b in zip(a_list, b_list))
    return op_norm(X)


def norm_formula_check(rep: CovariantRep, trials: int = 20, max_n: int = 3, max_len: int = 3,
                       seed: int = 0, tol: float = 1e-7) -> Report:
    ig = rep.ig
    alg = ig.alg
    rng = np.random.default_rng(seed)
    letters = rep.letters()
    out = Report(f"norm recipe on {rep.label}")
    worst, cases = 0.0, []
    for t in range(trials):
        n = int(rng.integers(1, max_n + 1))
        L = int(rng.integers(1, max_len + 1))
        w = tuple(letters[int(k)] for k in rng.integers(0, len(letters), L))
        a = [alg.random(rng) for _ in range(n)]
        b = [alg.random(rng) for _ in range(n)]
        f = norm_formula(ig, w, a, b)
        dn = direct_norm(rep, w, a, b)
        err = abs(f - dn) / max(1.0, dn)
        cases.append({"word": w, "n": n, "recipe": f, "direct": dn})
        worst = max(worst, err)
    out.add(Check.residual_check("norm.recipe", "recipe value = direct operator norm", worst, tol,
                                 witness={"trials": trials}))
    # elements of R_a keep their norm after multiplying by v_a
    worst_r = 0.0
    for w in _words(rep, 2):
        R = range_of(ig, w)
        va = rep.word_isometry(w)
        for _ in range(3):
            x = alg.unvec(R.Q @ (rng.standard_normal(R.dim) + 1j * rng.standard_normal(R.dim)))
            worst_r = max(worst_r, abs(op_norm(rep.image(x) @ va) - op_norm(x)) / max(1.0, op_norm(x)))
    out.add(Check.residual_check("norm.range_isometric", "|a v_a| = |a| for a in R_a", worst_r, 1e-9))
    out.data["cases"] = cases
    return out


# --------------------------------------------------------------------------
# formal elements evaluated in several models

def random_degree_one_terms(ig: InteractionGroup, count: int, seed: int = 0, max_len: int = 2) -> list:
    """Seeded formal sums of monomials ``a0 v_g1 a1 ... v_gn an`` with ``g1...gn = 1``."""
    G = ig.group
    alg = ig.alg
    rng = np.random.default_rng(seed)
    letters = [g for g in G.window() if g != G.identity]
    out = []
    for _ in range(count):
        terms = []
        for _ in range(int(rng.integers(1, 4))):
            L = int(rng.integers(0, max_len + 1))
            gs = [letters[int(k)] for k in rng.integers(0, len(letters), L)]
            gs.append(G.inv(G.prod(gs)))  # close the word
            if gs[-1] == G.identity:
                gs.pop()
            coeffs = [alg.random(rng) for _ in range(len(gs) + 1)]
            terms.append((tuple(gs), coeffs))
        out.append(terms)
    return out


def evaluate(rep: CovariantRep, element: list) -> np.ndarray:
    total = np.zeros((rep.dim, rep.dim), dtype=complex)
    for gs, coeffs in element:
        X = rep.image(coeffs[0])
        for g, a in zip(gs, coeffs[1:]):
            X = X @ rep.isometry(g) @ rep.image(a)
        total += X
    return total


def two_model_check(rep_a: CovariantRep, rep_b: CovariantRep, count: int = 10, seed: int = 0,
                    tol: float = 1e-6) -> Report:
    ig = rep_a.ig
    amp_a, amp_b = amplify(rep_a), amplify(rep_b)
    Ba = generated_star_algebra(list(amp_a.alg_images) + [amp_a.isometry(g) for g in ig.group.window()])
    Bb = generated_star_algebra(list(amp_b.alg_images) + [amp_b.isometry(g) for g in ig.group.window()])
    out = Report("two-model consistency")
    out.add(Check.flag("models.same_dim", "crossed products from both models have one dimension",
                       Ba.dim == Bb.dim, witness={"dims": [Ba.dim, Bb.dim]}))
    elems = random_degree_one_terms(ig, count, seed)
    worst, norms = 0.0, []
    for el in elems:
        na = op_norm(evaluate(amp_a, el))
        nb = op_norm(evaluate(amp_b, el))
        norms.append((na, nb))
        worst = max(worst, abs(na - nb) / max(1.0, na))
    out.add(Check.residual_check("models.same_norms", "norms of C_1 elements agree across models",
                                 worst, tol, witness={"norms": norms}))
    return out
