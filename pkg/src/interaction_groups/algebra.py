"""Finite-dimensional C*-algebras realised as block-diagonal matrices.

An algebra ``A = M_{n1} + ... + M_{nk}`` lives inside ``M_n`` with
``n = sum(n_i)``.  Elements are plain ``(n, n)`` complex ndarrays that vanish
outside the diagonal blocks.  Linear maps on ``A`` are ``d x d`` matrices
acting on coordinate vectors, ``d = sum(n_i**2)``, in the basis of matrix
units ordered block by block and row-major inside each block.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .report import Check, Report

TOL = 1e-9
NORM_TOL = 1e-8
POSITIVE_SAMPLES = 200

AlgElement = np.ndarray


class AlgebraError(ValueError):
    pass


class FdAlgebra:
    def __init__(self, block_sizes: Sequence[int]):
        sizes = [int(s) for s in block_sizes]
        if not sizes or any(s < 1 for s in sizes):
            raise AlgebraError("block sizes must be a non-empty list of positive integers")
        self.block_sizes = tuple(sizes)
        self.n = sum(sizes)
        self.d = sum(s * s for s in sizes)
        self.offsets = tuple(int(x) for x in np.cumsum([0] + sizes[:-1]))
        rows, cols = [], []
        for off, s in zip(self.offsets, sizes):
            for i in range(s):
                for j in range(s):
                    rows.append(off + i)
                    cols.append(off + j)
        self._rows = np.array(rows)
        self._cols = np.array(cols)

    def __repr__(self) -> str:
        return f"FdAlgebra({list(self.block_sizes)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FdAlgebra) and other.block_sizes == self.block_sizes

    def __hash__(self) -> int:
        return hash(self.block_sizes)

    # coordinates -----------------------------------------------------------
    def vec(self, a) -> np.ndarray:
        a = np.asarray(a)
        if a.shape != (self.n, self.n):
            raise AlgebraError(f"expected a {self.n}x{self.n} matrix, got shape {a.shape}")
        return a[self._rows, self._cols].astype(complex)

    def unvec(self, x) -> AlgElement:
        x = np.asarray(x)
        if x.shape != (self.d,):
            raise AlgebraError(f"expected a coordinate vector of length {self.d}")
        out = np.zeros((self.n, self.n), dtype=complex)
        out[self._rows, self._cols] = x
        return out

    def element(self, data) -> AlgElement:
        """Validate ``data`` as an element: zero outside the declared blocks."""
        a = np.asarray(data, dtype=complex)
        if a.shape != (self.n, self.n):
            raise AlgebraError(f"expected a {self.n}x{self.n} matrix, got shape {a.shape}")
        mask = np.zeros((self.n, self.n), dtype=bool)
        mask[self._rows, self._cols] = True
        if np.any(a[~mask] != 0):
            raise AlgebraError("element has entries outside the declared blocks")
        return a

    def from_blocks(self, blocks: Sequence) -> AlgElement:
        if len(blocks) != len(self.block_sizes):
            raise AlgebraError("wrong number of blocks")
        return sla.block_diag(*[np.asarray(b, dtype=complex) for b in blocks]).astype(complex)

    def blocks(self, a) -> list[np.ndarray]:
        return [a[o:o + s, o:o + s] for o, s in zip(self.offsets, self.block_sizes)]

    def contains(self, a, tol: float = TOL) -> bool:
        a = np.asarray(a)
        if a.shape != (self.n, self.n):
            return False
        return np.linalg.norm(a - self.unvec(self.vec(a))) <= tol

    @cached_property
    def basis(self) -> list[AlgElement]:
        return [self.unvec(e) for e in np.eye(self.d)]

    @property
    def unit(self) -> AlgElement:
        return np.eye(self.n, dtype=complex)

    @cached_property
    def unit_vec(self) -> np.ndarray:
        return self.vec(self.unit)

    def random(self, rng: np.random.Generator) -> AlgElement:
        return self.unvec(rng.standard_normal(self.d) + 1j * rng.standard_normal(self.d))

    def random_positive(self, rng: np.random.Generator) -> AlgElement:
        b = self.random(rng)
        return b @ b.conj().T

    # structure matrices ------------------------------------------------------
    @cached_property
    def star_matrix(self) -> np.ndarray:
        """Real-linear star written as ``vec(a*) = P conj(vec(a))``."""
        P = np.zeros((self.d, self.d))
        for k, e in enumerate(self.basis):
            P[:, k] = self.vec(e.conj().T).real
        return P

    def star_vec(self, x) -> np.ndarray:
        return self.star_matrix @ np.conj(x)

    def left_mult(self, a) -> np.ndarray:
        """Matrix of ``b -> a b`` on coordinates."""
        mats = [np.kron(blk, np.eye(s)) for blk, s in zip(self.blocks(a), self.block_sizes)]
        return sla.block_diag(*mats)

    def right_mult(self, a) -> np.ndarray:
        """Matrix of ``b -> b a`` on coordinates."""
        mats = [np.kron(np.eye(s), blk.T) for blk, s in zip(self.blocks(a), self.block_sizes)]
        return sla.block_diag(*mats)

    def normalized_trace(self, a) -> complex:
        return np.trace(a) / self.n

    def hs_inner(self, a, b) -> complex:
        return np.vdot(self.vec(a), self.vec(b))


def op_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def is_positive(a, tol: float = TOL) -> bool:
    a = np.asarray(a)
    if np.linalg.norm(a - a.conj().T) > tol:
        return False
    return bool(np.linalg.eigvalsh((a + a.conj().T) / 2).min() >= -tol)


def min_eig(a) -> float:
    a = np.asarray(a)
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2).min())


# --------------------------------------------------------------------------
# linear maps

@dataclass(frozen=True, eq=False)
class LinMap:
    alg: FdAlgebra
    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.shape != (self.alg.d, self.alg.d):
            raise AlgebraError(f"map matrix must be {self.alg.d}x{self.alg.d}, got {m.shape}")
        object.__setattr__(self, "mat", m)

    @classmethod
    def from_function(cls, alg: FdAlgebra, fn: Callable) -> "LinMap":
        cols = [alg.vec(fn(e)) for e in alg.basis]
        return cls(alg, np.column_stack(cols))

    @classmethod
    def identity(cls, alg: FdAlgebra) -> "LinMap":
        return cls(alg, np.eye(alg.d))

    def __call__(self, a) -> AlgElement:
        return self.alg.unvec(self.mat @ self.alg.vec(a))

    def __matmul__(self, other: "LinMap") -> "LinMap":
        return LinMap(self.alg, self.mat @ other.mat)

    def __sub__(self, other: "LinMap") -> "LinMap":
        return LinMap(self.alg, self.mat - other.mat)

    def power(self, k: int) -> "LinMap":
        return LinMap(self.alg, np.linalg.matrix_power(self.mat, k))

    def dist(self, other: "LinMap") -> float:
        return float(np.linalg.norm(self.mat - other.mat, 2))

    def range(self, rel_cut: float = TOL) -> "Subspace":
        return Subspace.range_of(self.mat, rel_cut)

    def choi(self) -> np.ndarray:
        """Choi matrix sum_ij e_ij (x) V(e_ij) over the full embedding M_n."""
        n = self.alg.n
        C = np.zeros((n * n, n * n), dtype=complex)
        for k, (r, c) in enumerate(zip(self.alg._rows, self.alg._cols)):
            eij = np.zeros((n, n))
            eij[r, c] = 1
            C += np.kron(eij, self.alg.unvec(self.mat[:, k]))
        return C


def choi_blocks(V: LinMap) -> list[np.ndarray]:
    """Choi matrices restricted to each source block; PSD for all iff V is CP."""
    alg = V.alg
    out = []
    k0 = 0
    for s in alg.block_sizes:
        C = np.zeros((s * alg.n, s * alg.n), dtype=complex)
        for i in range(s):
            for j in range(s):
                eij = np.zeros((s, s))
                eij[i, j] = 1
                C += np.kron(eij, alg.unvec(V.mat[:, k0 + i * s + j]))
        out.append(C)
        k0 += s * s
    return out


@dataclass
class MapCertificate:
    unital: bool
    cp: bool
    positive_sampled: bool
    unital_residual: float
    choi_min_eig: float
    sample_min_eig: float

    @property
    def level(self) -> str:
        if self.cp:
            return "cp-certified"
        if self.positive_sampled:
            return "positive-unverified"
        return "not-positive"


def map_certify(V: LinMap, tol: float = TOL, samples: int = POSITIVE_SAMPLES,
                seed: int = 0) -> MapCertificate:
    alg = V.alg
    unital_res = float(np.linalg.norm(V(alg.unit) - alg.unit))
    choi_min = min(min_eig(C) for C in choi_blocks(V))
    hermitian_ok = all(np.linalg.norm(C - C.conj().T) <= tol for C in choi_blocks(V))
    rng = np.random.default_rng(seed)
    smin = np.inf
    herm_s = True
    for _ in range(samples):
        p = alg.random_positive(rng)
        p /= max(op_norm(p), 1e-300)
        q = V(p)
        herm_s &= bool(np.linalg.norm(q - q.conj().T) <= tol)
        smin = min(smin, min_eig(q))
    return MapCertificate(unital_res <= tol, bool(hermitian_ok and choi_min >= -tol),
                          bool(herm_s and smin >= -tol), unital_res, choi_min, float(smin))


def certify_checks(prefix: str, V: LinMap, tol: float = TOL, seed: int = 0) -> list[Check]:
    cert = map_certify(V, tol, seed=seed)
    return [
        Check.residual_check(f"{prefix}.unital", "V(1) = 1", cert.unital_residual, tol),
        Check.residual_check(f"{prefix}.cp", "Choi matrix is positive semidefinite",
                             max(0.0, -cert.choi_min_eig), tol, witness={"level": cert.level}),
        Check.residual_check(f"{prefix}.positive_sampled", "V(b b*) >= 0 on seeded samples",
                             max(0.0, -cert.sample_min_eig), tol),
    ]


# --------------------------------------------------------------------------
# subspaces of matrix spaces

class Subspace:
    """A subspace of ``C^D`` with an orthonormal basis stored as columns."""

    def __init__(self, basis: np.ndarray, ambient: int | None = None,
                 shape: tuple[int, int] | None = None):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 2:
            raise ValueError("basis must be a 2-d array of columns")
        self.Q = basis
        self.ambient = basis.shape[0] if ambient is None else ambient
        self.shape = shape

    @property
    def dim(self) -> int:
        return self.Q.shape[1]

    def matrices(self) -> list[np.ndarray]:
        if self.shape is None:
            raise ValueError("subspace has no matrix shape")
        return [q.reshape(self.shape) for q in self.Q.T]

    @classmethod
    def zero(cls, ambient: int, shape=None) -> "Subspace":
        return cls(np.zeros((ambient, 0), dtype=complex), ambient, shape)

    @classmethod
    def full(cls, ambient: int, shape=None) -> "Subspace":
        return cls(np.eye(ambient, dtype=complex), ambient, shape)

    @classmethod
    def span(cls, vectors, rel_cut: float = TOL, ambient: int | None = None,
             shape=None, abs_cut: float | None = None) -> "Subspace":
        vs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
        if not vs:
            if ambient is None:
                raise ValueError("empty span needs an ambient dimension")
            return cls.zero(ambient, shape)
        M = np.column_stack(vs)
        return cls.range_of(M, rel_cut, shape=shape, abs_cut=abs_cut)

    @classmethod
    def range_of(cls, M, rel_cut: float = TOL, shape=None, abs_cut: float | None = None) -> "Subspace":
        M = np.asarray(M, dtype=complex)
        if M.shape[1] == 0:
            return cls.zero(M.shape[0], shape)
        U, s, _ = np.linalg.svd(M, full_matrices=False)
        smax = s[0] if s.size else 0.0
        cut = rel_cut * smax if abs_cut is None else abs_cut
        r = int(np.sum(s > max(cut, 1e-300))) if smax > 0 else 0
        return cls(U[:, :r], M.shape[0], shape)

    @classmethod
    def null_space(cls, M, rel_cut: float = TOL) -> "Subspace":
        M = np.asarray(M, dtype=complex)
        N = sla.null_space(M, rcond=rel_cut) if M.size else np.eye(M.shape[1])
        return cls(N, M.shape[1])

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex).ravel()
        return self.Q @ (self.Q.conj().T @ x)

    def residual(self, x) -> float:
        """Distance from ``x`` to the subspace, relative to ``max(1, |x|)``."""
        x = np.asarray(x, dtype=complex).ravel()
        r = x - self.project(x)
        return float(np.linalg.norm(r) / max(1.0, np.linalg.norm(x)))

    def contains(self, x, tol: float = TOL) -> bool:
        return self.residual(x) <= tol

    def containment_residual(self, other: "Subspace") -> float:
        """How far ``other`` sticks out of ``self`` (0 when contained)."""
        if other.dim == 0:
            return 0.0
        R = other.Q - self.Q @ (self.Q.conj().T @ other.Q)
        return float(np.linalg.norm(R, 2))

    def extend(self, vectors, abs_cut: float = 1e-8) -> "Subspace":
        """Add ``vectors`` to the span, keeping an orthonormal basis."""
        vs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
        if not vs:
            return self
        M = np.column_stack(vs)
        # one global scale: per-column normalisation would blow rounding noise up to unit size
        scale = np.linalg.norm(M, axis=0).max()
        if scale <= 1e-300:
            return self
        M = M / scale
        for _ in range(2):
            M = M - self.Q @ (self.Q.conj().T @ M)
        U, s, _ = np.linalg.svd(M, full_matrices=False)
        r = int(np.sum(s > abs_cut))
        if r == 0:
            return self
        U = U[:, :r]
        U = U - self.Q @ (self.Q.conj().T @ U)
        U, _ = np.linalg.qr(U)
        return Subspace(np.hstack([self.Q, U]), self.ambient, self.shape)

    def __add__(self, other: "Subspace") -> "Subspace":
        return self.extend(other.Q.T)

    def intersect(self, other: "Subspace", tol: float = 1e-8) -> "Subspace":
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient, self.shape)
        # x = Q a with (I - P_other) Q a = 0
        A = self.Q - other.Q @ (other.Q.conj().T @ self.Q)
        _, s, Vh = np.linalg.svd(A, full_matrices=True)
        s_full = np.zeros(self.dim)
        s_full[:s.size] = s
        null = Vh.conj().T[:, s_full <= tol]
        return Subspace(self.Q @ null, self.ambient, self.shape).orthonormalized()

    def orthonormalized(self) -> "Subspace":
        if self.dim == 0:
            return self
        U, s, _ = np.linalg.svd(self.Q, full_matrices=False)
        return Subspace(U[:, s > 1e-10], self.ambient, self.shape)

    def distance(self, other: "Subspace") -> float:
        """Spectral norm of the difference of the orthogonal projections."""
        P = self.Q @ self.Q.conj().T
        R = other.Q @ other.Q.conj().T
        return float(np.linalg.norm(P - R, 2)) if self.ambient else 0.0

    def equals(self, other: "Subspace", tol: float = 1e-8) -> bool:
        return self.dim == other.dim and self.distance(other) <= tol

    def gram_residual(self) -> float:
        return float(np.linalg.norm(self.Q.conj().T @ self.Q - np.eye(self.dim)))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"


def generated_star_algebra(gens: Iterable, tol: float = TOL, max_iter: int = 200) -> Subspace:
    """Unital *-algebra generated by square matrices, as an orthonormal basis.

    Starting from ``{1} u gens u gens*`` the span is multiplied on the left by
    the generators and their adjoints until it stops growing.  This reaches the
    same fixed point as repeated ``span + span*span + span*`` closure since any
    product of elements is a word in the generators.
    """
    gens = [np.asarray(g, dtype=complex) for g in gens]
    if not gens:
        raise ValueError("need at least one generator")
    m = gens[0].shape[0]
    if any(g.shape != (m, m) for g in gens):
        raise ValueError("generators must be square matrices of one size")
    letters = []
    for g in gens:
        letters.append(g)
        if np.linalg.norm(g - g.conj().T) > tol * max(1.0, np.linalg.norm(g)):
            letters.append(g.conj().T)
    S = Subspace.zero(m * m, (m, m)).extend([np.eye(m)] + letters)
    frontier = S.Q
    for _ in range(max_iter):
        if frontier.shape[1] == 0:
            return S
        new = []
        for q in frontier.T:
            X = q.reshape(m, m)
            new.extend(L @ X for L in letters)
        before = S.dim
        S = S.extend(new)
        frontier = S.Q[:, before:]
    raise RuntimeError("generated algebra did not stabilise")


# --------------------------------------------------------------------------
# states and conditional expectations

@dataclass
class AlgState:
    alg: FdAlgebra
    rho: np.ndarray
    tol: float = TOL

    def __post_init__(self):
        self.rho = self.alg.element(self.rho)
        if not is_positive(self.rho, self.tol):
            raise AlgebraError("density is not positive semidefinite")
        if abs(np.trace(self.rho) - 1) > self.tol:
            raise AlgebraError(f"density has trace {np.trace(self.rho).real:.6g}, expected 1")

    @classmethod
    def trace(cls, alg: FdAlgebra) -> "AlgState":
        return cls(alg, alg.unit / alg.n)

    def __call__(self, a) -> complex:
        return complex(np.trace(self.rho @ a))

    @property
    def functional(self) -> np.ndarray:
        """Row vector ``w`` with ``phi(a) = w . vec(a)``."""
        return self.alg.vec(self.rho.T)

    def is_faithful(self, tol: float = TOL) -> bool:
        return min_eig(self.rho) > tol


def gram_matrix(alg: FdAlgebra, E: LinMap | None = None) -> np.ndarray:
    """``G_ij = tau(E(b_i* b_j))`` over the matrix-unit basis, ``tau`` the normalized trace."""
    w = alg.vec(np.eye(alg.n)) / alg.n
    Gm = np.zeros((alg.d, alg.d), dtype=complex)
    for i, bi in enumerate(alg.basis):
        prods = np.column_stack([alg.vec(bi.conj().T @ bj) for bj in alg.basis])
        if E is not None:
            prods = E.mat @ prods
        Gm[i, :] = w @ prods
    return Gm


def cond_exp_check(E: LinMap, tol: float = TOL, prefix: str = "condexp",
                   exhaustive_limit: int = 20000, samples: int = 200, seed: int = 0) -> Report:
    alg = E.alg
    rep = Report(f"conditional expectation check ({prefix})")
    rep.add(Check.residual_check(f"{prefix}.idempotent", "E o E = E",
                                 np.linalg.norm(E.mat @ E.mat - E.mat, 2), tol))
    rep.extend(certify_checks(prefix, E, tol, seed))
    R = E.range()
    rng = np.random.default_rng(seed)
    mats = [alg.unvec(q) for q in R.Q.T]
    worst = 0.0
    r = len(mats)
    if r * r * alg.d <= exhaustive_limit:
        triples = ((x, b, y) for x in mats for y in mats for b in alg.basis)
    else:
        triples = ((mats[rng.integers(r)], alg.random(rng), mats[rng.integers(r)])
                   for _ in range(samples))
    for x, b, y in triples:
        worst = max(worst, op_norm(E(x @ b @ y) - x @ E(b) @ y))
    rep.add(Check.residual_check(f"{prefix}.bimodule", "E(x b y) = x E(b) y on the range", worst, tol))
    closed = max((op_norm(x @ y - alg.unvec(R.project(alg.vec(x @ y)))) for x in mats for y in mats),
                 default=0.0)
    rep.add(Check.residual_check(f"{prefix}.range_subalgebra", "range of E is closed under products",
                                 closed, tol))
    gmin = min_eig(gram_matrix(alg, E))
    rep.add(Check(f"{prefix}.faithful", "tau(E(b_i* b_j)) positive definite",
                  "pass" if gmin > tol else "fail", tol=tol,
                  witness={"gram_min_eig": gmin}))
    rep.data["range_dim"] = R.dim
    rep.data["gram_min_eig"] = gmin
    return rep


def is_conditional_expectation(E: LinMap, tol: float = TOL) -> bool:
    rep = cond_exp_check(E, tol)
    return all(c.passed for c in rep if not c.id.endswith(".faithful"))
