"""Hilbert modules ``H_X`` over ranges ``R_X`` and twisted-adjointable maps.

``H_X`` is the algebra ``A`` itself with the ``R_X``-valued pairing
``<a, b>_X = E_X(a* b)``.  A map ``T`` of degree ``g`` sends ``H_X`` to
``H_{gX}`` and is adjointable when some ``S`` satisfies
``<T x, y>_{gX} = V_g(<x, S y>_X)``.  Everything is finite-dimensional, so the
inclusion ``H_X -> H_Y`` for ``X`` inside ``Y`` is the identity of ``A``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .algebra import NORM_TOL, TOL, LinMap, Subspace, gram_matrix, min_eig, op_norm
from .interaction import InteractionGroup, set_expectation
from .report import Check, Report

ADJOINT_GATE = 1e-8
CROSS_CHECK_GATE = 1e-6


class NotAdjointable(ValueError):
    pass


def _canon_set(ig: InteractionGroup, X) -> frozenset:
    X = frozenset(ig.group.canon(x) for x in X)
    if not X:
        raise ValueError("X must be non-empty")
    return X


def translate(ig: InteractionGroup, g, X) -> frozenset:
    return frozenset(ig.group.mul(g, x) for x in X)


class HModule:
    def __init__(self, ig: InteractionGroup, X):
        self.ig = ig
        self.index_set = _canon_set(ig, X)
        self.cond_exp = set_expectation(ig, self.index_set)
        self.gram = gram_matrix(ig.alg, self.cond_exp)
        self.gram = (self.gram + self.gram.conj().T) / 2
        evals = np.linalg.eigvalsh(self.gram)
        self.gram_min = float(evals.min())
        if self.gram_min <= TOL:
            raise ValueError(f"pairing on H_X is degenerate (min Gram eigenvalue {self.gram_min:.3g})")
        self._sqrt = sla.sqrtm(self.gram)
        self._isqrt = np.linalg.inv(self._sqrt)

    def inner(self, a, b) -> np.ndarray:
        return self.cond_exp(a.conj().T @ b)

    def norm(self, xi) -> float:
        return float(np.sqrt(max(op_norm(self.inner(xi, xi)), 0.0)))

    def localized_norm(self, M: np.ndarray) -> float:
        """Norm of a coordinate matrix acting on ``(A, tau(E_X(a* b)))``."""
        return float(np.linalg.norm(self._sqrt @ M @ self._isqrt, 2))

    def __repr__(self) -> str:
        return f"HModule(index_set={sorted(self.index_set)!r})"


def module_norm(m: HModule, xi) -> float:
    return m.norm(xi)


@dataclass(eq=False)
class ModuleMap:
    ig: InteractionGroup
    index_set: frozenset
    degree: object
    linmap: LinMap

    def __post_init__(self):
        self.index_set = _canon_set(self.ig, self.index_set)
        self.degree = self.ig.group.canon(self.degree)

    @property
    def target(self) -> frozenset:
        return translate(self.ig, self.degree, self.index_set)

    def __call__(self, xi):
        return self.linmap(xi)

    def compose(self, first: "ModuleMap") -> "ModuleMap":
        """``self o first``: apply ``first`` then ``self``."""
        if first.target != self.index_set:
            raise ValueError("composition needs matching modules")
        return ModuleMap(self.ig, first.index_set, self.ig.group.mul(self.degree, first.degree), self.linmap @ first.linmap)


def shat(ig: InteractionGroup, g, X) -> ModuleMap:
    return ModuleMap(ig, X, g, ig.map(g))


def _solve_adjoint(T: ModuleMap) -> tuple[np.ndarray, float, int]:
    ig = T.ig
    alg = ig.alg
    EX = set_expectation(ig, T.index_set)
    EgX = set_expectation(ig, T.target)
    Vg = ig.map(T.degree)
    basis = alg.basis
    # <T b_i, b_j>_{gX} = V_g E_X (b_i* S b_j) for all i, j
    L = np.vstack([Vg.mat @ EX.mat @ alg.left_mult(b.conj().T) for b in basis])
    Tb = [T.linmap(b) for b in basis]
    R = np.column_stack([
        np.concatenate([alg.vec(EgX(Tb[i].conj().T @ bj)) for i in range(alg.d)])
        for bj in basis])
    S, _, rank, _ = np.linalg.lstsq(L, R, rcond=None)
    resid = float(np.linalg.norm(L @ S - R) / max(1.0, np.linalg.norm(R)))
    return S, resid, int(rank)


def adjoint(T: ModuleMap, gate: float = ADJOINT_GATE) -> ModuleMap:
    S, resid, rank = _solve_adjoint(T)
    if rank < T.ig.alg.d:
        raise NotAdjointable(f"adjoint is not unique (rank {rank} < {T.ig.alg.d}); "
                             f"is g^-1 in X?")
    if resid > gate:
        raise NotAdjointable(f"no adjoint: least-squares residual {resid:.3e} exceeds {gate:.0e}")
    return ModuleMap(T.ig, T.target, T.ig.group.inv(T.degree), LinMap(T.ig.alg, S))


def is_adjointable(T: ModuleMap, gate: float = ADJOINT_GATE) -> bool:
    try:
        adjoint(T, gate)
    except NotAdjointable:
        return False
    return True


def star_product(T: ModuleMap) -> np.ndarray:
    """Coordinate matrix of ``T* T`` on ``H_X``."""
    return adjoint(T).linmap.mat @ T.linmap.mat


@dataclass
class NormResult:
    norm: float
    star_norm: float
    cross_norm: float
    sampled_sup: float

    @property
    def discrepancy(self) -> float:
        return abs(self.star_norm - self.cross_norm)


def module_op_norm(T: ModuleMap, samples: int = 64, seed: int = 0) -> NormResult:
    """``||T||`` from ``||T*T||`` localised at the normalized trace.

    The same number is recomputed from ``||T T*||`` on the target module and
    bounded below by sampled module-norm ratios.
    """
    ig = T.ig
    src = HModule(ig, T.index_set)
    dst = HModule(ig, T.target)
    Ts = adjoint(T)
    TsT = Ts.linmap.mat @ T.linmap.mat
    TTs = T.linmap.mat @ Ts.linmap.mat
    star = src.localized_norm(TsT)
    cross = dst.localized_norm(TTs)
    rng = np.random.default_rng(seed)
    best = 0.0
    # top localized eigenvector first, then random directions
    vals, vecs = sla.eigh(src.gram @ TsT, src.gram)
    cands = [ig.alg.unvec(vecs[:, int(np.argmax(vals.real))])] + [ig.alg.random(rng) for _ in range(samples)]
    for xi in cands:
        nx = src.norm(xi)
        if nx > 1e-12:
            best = max(best, dst.norm(T.linmap(xi)) / nx)
    if abs(star - cross) > CROSS_CHECK_GATE:
        raise ArithmeticError(f"localized norms disagree: |T*T| = {star:.12g}, |TT*| = {cross:.12g}")
    return NormResult(float(np.sqrt(star)), star, cross, best)


def extend(T: ModuleMap, Y) -> ModuleMap:
    """Extension of ``T`` from ``H_X`` to ``H_Y``; same linear data, re-certified."""
    Y = _canon_set(T.ig, Y)
    if not T.index_set <= Y:
        raise ValueError("extension needs X inside Y")
    out = ModuleMap(T.ig, Y, T.degree, T.linmap)
    adjoint(out)
    return out


def _maps_close(A: ModuleMap, B: ModuleMap) -> float:
    return float(np.linalg.norm(A.linmap.mat - B.linmap.mat, 2))


def module_suite(ig: InteractionGroup, g, X, Y=None, tol: float = TOL, seed: int = 0,
                 label: str = "") -> Report:
    """Adjoint, norm and extension identities for ``shat_g`` on ``H_X`` (and ``H_Y``)."""
    G = ig.group
    alg = ig.alg
    X = _canon_set(ig, X)
    Y = X if Y is None else _canon_set(ig, Y)
    if G.identity not in X or G.inv(g) not in X:
        raise ValueError(f"need 1 and g^-1 in X for the adjoint identities, got X={sorted(X)!r}, g={g!r}")
    if not X <= Y:
        raise ValueError("extension target Y must contain X")
    rep = Report(f"Hilbert-module identities{label} for g={g!r}, X={sorted(X)!r}")
    wit = {"g": g, "X": sorted(X)}
    T = shat(ig, g, X)
    src = HModule(ig, X)
    dst = HModule(ig, T.target)
    Ts = adjoint(T)
    expected = shat(ig, G.inv(g), T.target)
    rep.add(Check.residual_check("module.shat_adjoint", "adjoint of shat_g is shat_g^-1",
                                 _maps_close(Ts, expected), tol, witness=wit))
    Tss = adjoint(Ts)
    rep.add(Check.residual_check("module.double_adjoint", "T** = T", _maps_close(Tss, T), tol, witness=wit))
    contraction = max(dst.norm(T(b)) - src.norm(b) for b in alg.basis)
    rep.add(Check.residual_check("module.shat_contractive", "|shat_g x|_gX <= |x|_X",
                                 max(0.0, contraction), NORM_TOL, witness=wit))
    RX = src.cond_exp.range()
    lin = 0.0
    for q in RX.Q.T:
        a = alg.unvec(q)
        Va = ig.map(g)(a)
        for b in alg.basis:
            lin = max(lin, op_norm(T(b @ a) - T(b) @ Va))
    rep.add(Check.residual_check("module.twisted_linear", "T(x a) = T(x) V_g(a) for a in R_X",
                                 lin, tol, witness=wit))
    TsT = Ts.linmap.mat @ T.linmap.mat
    # positivity of T*T in the localized picture: G TsT is PSD for the Gram G
    pos = min_eig(src.gram @ TsT)
    rep.add(Check.residual_check("module.star_positive", "T*T is positive", max(0.0, -pos), TOL, witness=wit))
    nr = module_op_norm(T, seed=seed)
    rep.add(Check.residual_check("module.cstar_identity", "|T*T| = |T|^2", nr.discrepancy, NORM_TOL,
                                 witness={**wit, "norm": nr.norm}))
    rep.add(Check.residual_check("module.norm_sup", "sampled |T x|/|x| stays below |T|",
                                 max(0.0, nr.sampled_sup - nr.norm), NORM_TOL,
                                 witness={**wit, "sampled_sup": nr.sampled_sup}))
    rep.add(Check.residual_check("module.unit_attains", "|shat_g 1| = 1 when V_g is unital",
                                 abs(dst.norm(T(alg.unit)) - 1.0), NORM_TOL, witness=wit))

    # (S T)* = T* S* with S = shat_h on the target module, for every h reachable
    comp_worst = 0.0
    for h in _letters(ig):
        if G.inv(h) not in T.target:
            continue
        S = shat(ig, h, T.target)
        ST = S.compose(T)
        lhs = adjoint(ST)
        rhs = Ts.compose(adjoint(S))
        comp_worst = max(comp_worst, _maps_close(lhs, rhs))
    rep.add(Check.residual_check("module.adjoint_composition", "(ST)* = T*S*", comp_worst, tol, witness=wit))

    # extension to Y
    EY = set_expectation(ig, Y)
    compat = max(op_norm(EY(b.conj().T @ b) - EY(src.inner(b, b))) for b in alg.basis)
    rep.add(Check.residual_check("module.extension_pairing", "<x, x>_Y = E_Y(<x, x>_X)",
                                 compat, 1e-10, witness={**wit, "Y": sorted(Y)}))
    Tt = extend(T, Y)
    Tst = extend(Ts, translate(ig, g, Y))
    rep.add(Check.residual_check("module.extension_adjoint", "adjoint of the extension extends the adjoint",
                                 _maps_close(adjoint(Tt), Tst), tol, witness={**wit, "Y": sorted(Y)}))
    nrt = module_op_norm(Tt, seed=seed)
    rep.add(Check.residual_check("module.extension_isometric", "|extension of T| = |T|",
                                 abs(nrt.norm - nr.norm), NORM_TOL, witness={**wit, "Y": sorted(Y)}))
    ext_contr = max(HModule(ig, Y).norm(b) - src.norm(b) for b in alg.basis)
    rep.add(Check.residual_check("module.inclusion_contractive", "|x|_Y <= |x|_X",
                                 max(0.0, ext_contr), NORM_TOL))
    return rep


def extension_functoriality(ig: InteractionGroup, g, h, X, Y, Z=None, tol: float = TOL) -> Report:
    """Extension commutes with composition and is transitive along ``X <= Y <= Z``."""
    X = _canon_set(ig, X)
    Y = _canon_set(ig, Y)
    rep = Report("extension functoriality")
    T = shat(ig, g, X)
    S = shat(ig, h, T.target)
    ST = S.compose(T)
    lhs = extend(S, translate(ig, g, Y)).compose(extend(T, Y))
    rhs = extend(ST, Y)
    rep.add(Check.residual_check("module.extension_functor", "extension of ST = product of extensions",
                                 _maps_close(lhs, rhs), tol, witness={"g": g, "h": h}))
    if Z is not None:
        Z = _canon_set(ig, Z)
        d = _maps_close(extend(extend(T, Y), Z), extend(T, Z))
        rep.add(Check.residual_check("module.extension_transitive", "X to Y to Z equals X to Z", d, tol))
    return rep


def _letters(ig: InteractionGroup) -> list:
    G = ig.group
    if G.finite:
        return G.window()
    return [G.identity] + G.generators()


# --------------------------------------------------------------------------
# Fell-bundle fibers for finite groups

def fell_fiber(ig: InteractionGroup, g, tol: float = 1e-9) -> Subspace:
    """All adjointable maps of degree ``g`` on ``H_G``, as a subspace of ``d x d`` matrices.

    Adjointability is the real-linear condition
    ``E_G((T b_i)* b_j) = V_g E_G(b_i* S b_j)`` in the unknowns ``(T, S)``.
    """
    G = ig.group
    if not G.finite:
        raise ValueError("fibers are computed for finite groups only")
    alg = ig.alg
    d = alg.d
    EG = set_expectation(ig, G.window())
    Vg = ig.map(g)
    P = alg.star_matrix
    rows_re = []
    # coefficient of conj(vec(T)) in E_G((T b_i)* b_j) = E_G(R_{b_j} P conj(T b_i))
    for i in range(d):
        Ni = Vg.mat @ EG.mat @ alg.left_mult(alg.basis[i].conj().T)
        for j in range(d):
            Mj = EG.mat @ alg.right_mult(alg.basis[j]) @ P
            # term in conj(T): Mj conj(T[:, i]); term in S: -Ni S[:, j]
            A_T = np.zeros((d, d * d), dtype=complex)
            A_T[:, i::d] = Mj
            A_S = np.zeros((d, d * d), dtype=complex)
            A_S[:, j::d] = -Ni
            rows_re.append((A_T, A_S))
    # unknown layout: t = T.ravel() (row-major, T[k, i] at k*d + i), s = S.ravel()
    # the equation is A_T conj(t) + A_S s = 0; split into real and imaginary parts
    blocks = []
    for A_T, A_S in rows_re:
        # conj(t) = tr - i ti ; s = sr + i si
        re = np.hstack([A_T.real, A_T.imag, A_S.real, -A_S.imag])
        im = np.hstack([A_T.imag, -A_T.real, A_S.imag, A_S.real])
        blocks.append(re)
        blocks.append(im)
    M = np.vstack(blocks)
    N = sla.null_space(M, rcond=tol)
    tr = N[: d * d]
    ti = N[d * d: 2 * d * d]
    tvecs = tr + 1j * ti
    fiber = Subspace.span(list(tvecs.T), ambient=d * d, shape=(d, d)) if tvecs.shape[1] else \
        Subspace.zero(d * d, (d, d))
    return fiber


def fell_bundle_report(ig: InteractionGroup, tol: float = 1e-8, samples: int = 3, seed: int = 0) -> Report:
    G = ig.group
    rep = Report(f"Fell-bundle laws for {ig.name}")
    fibers = {g: fell_fiber(ig, g) for g in G.window()}
    rep.data["fiber_dims"] = {str(g): f.dim for g, f in fibers.items()}
    X = G.window()
    rng = np.random.default_rng(seed)
    prod_worst = inv_worst = cstar_worst = shat_worst = 0.0
    for g, Fg in fibers.items():
        shat_worst = max(shat_worst, Fg.residual(ig.map(g).mat.ravel()))
        if Fg.dim == 0:
            continue
        mats = Fg.matrices()
        elems_g = mats[:samples] + [sum(c * m for c, m in zip(rng.standard_normal(Fg.dim), mats))]
        for Tm in elems_g:
            T = ModuleMap(ig, X, g, LinMap(ig.alg, Tm))
            Ts = adjoint(T)
            inv_worst = max(inv_worst, fibers[G.inv(g)].residual(Ts.linmap.mat.ravel()))
            nr = module_op_norm(T, samples=8, seed=seed)
            cstar_worst = max(cstar_worst, nr.discrepancy)
            for h, Fh in fibers.items():
                for Sm in Fh.matrices()[:samples]:
                    prod = Sm @ Tm  # apply T (degree g) then S (degree h)
                    prod_worst = max(prod_worst, fibers[G.mul(h, g)].residual(prod.ravel()))
    rep.add(Check.residual_check("fell.contains_shat", "shat_g lies in B_g", shat_worst, tol))
    rep.add(Check.residual_check("fell.product", "B_h B_g within B_hg", prod_worst, tol))
    rep.add(Check.residual_check("fell.involution", "B_g* within B_g^-1", inv_worst, tol))
    rep.add(Check.residual_check("fell.cstar", "|b*b| = |b|^2 on fibers", cstar_worst, tol))
    return rep


# --------------------------------------------------------------------------
# regular covariant representation

def invariant_reference_state(ig: InteractionGroup) -> np.ndarray:
    """Coordinate functional of ``psi = mean_h tau o V_h o E_G``.

    ``psi`` is faithful and ``V_g``-invariant on ``R_G``; on the canonical
    examples it reduces to ``tau o E_G``.
    """
    G = ig.group
    alg = ig.alg
    EG = set_expectation(ig, G.window())
    tau = alg.vec(np.eye(alg.n)) / alg.n
    w = np.zeros(alg.d, dtype=complex)
    for h in G.window():
        w += tau @ ig.map(h).mat @ EG.mat
    return w / len(G.window())


def regular_rep(ig: InteractionGroup):
    """Left multiplication and ``shat`` on ``H_G`` localised at an invariant state."""
    from .covariance import hilbert_rep_from_functional

    G = ig.group
    if not G.finite:
        raise ValueError("the regular representation is built for finite groups")
    w = invariant_reference_state(ig)
    return hilbert_rep_from_functional(ig, w, label="regular")
