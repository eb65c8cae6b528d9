"""Fermionic Fock space over C^d, CAR operators and the Toeplitz counterexample.

Basis states are subsets of ``{0, ..., d-1}`` stored as bitmasks, ordered by
integer value.  ``c_i`` creates mode ``i`` with the Jordan-Wigner sign
``(-1)^{#occupied modes below i}``.  The annihilator ``a(f) = sum f_i c_i^*``
is linear in ``f``; ``a*(f) = a(f)^*`` is then antilinear.

Wedge products are normalised by determinants over ``n!``.  The occupation
basis state ``|S>`` equals ``sqrt(n!)`` times the wedge of the corresponding
basis vectors, which is the only rescaling between the two pictures.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import FdAlgebra, LinMap, certify_checks, op_norm
from .extension import commuting_expectations
from .report import FAIL, FINDING, PASS, Check, Report

FOCK_TOL = 1e-12
CE_TOL = 1e-10
DELTA_THRESHOLD = 1e-3
INTERIOR = 8
SURROGATE_ANCHOR = "surrogate expectations commute iff the range projections do"


def inner(f, g) -> complex:
    """``<f, g> = sum f_i conj(g_i)``, linear in the first slot."""
    return complex(np.sum(np.asarray(f) * np.conj(np.asarray(g))))


@dataclass(frozen=True)
class FockSpace:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("one-particle dimension must be positive")

    @property
    def dim(self) -> int:
        return 1 << self.d

    @cached_property
    def alg(self) -> FdAlgebra:
        return FdAlgebra([self.dim])

    @cached_property
    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, complex)
        v[0] = 1
        return v

    @staticmethod
    def subset(mask: int) -> tuple[int, ...]:
        return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)

    def number(self, mask: int) -> int:
        return bin(mask).count("1")

    @cached_property
    def _creators(self) -> list[np.ndarray]:
        out = []
        for i in range(self.d):
            c = np.zeros((self.dim, self.dim), complex)
            for S in range(self.dim):
                if not S >> i & 1:
                    c[S | 1 << i, S] = (-1) ** bin(S & ((1 << i) - 1)).count("1")
            out.append(c)
        return out

    def creator(self, i: int) -> np.ndarray:
        """``c_i = a*(e_i)``."""
        return self._creators[i]

    def _vector(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=complex)
        if f.shape != (self.d,):
            raise ValueError(f"expected a vector of length {self.d}, got shape {f.shape}")
        return f

    def annihilation(self, f) -> np.ndarray:
        f = self._vector(f)
        return sum(f[i] * self._creators[i].conj().T for i in range(self.d))

    def creation(self, f) -> np.ndarray:
        return self.annihilation(f).conj().T


def car_check(F: FockSpace, tol: float = FOCK_TOL) -> Report:
    rep = Report(f"CAR relations, d = {F.d}")
    a = [F.annihilation(np.eye(F.d)[i]) for i in range(F.d)]
    anti = cross = 0.0
    for i in range(F.d):
        for j in range(F.d):
            anti = max(anti, op_norm(a[i] @ a[j] + a[j] @ a[i]))
            want = np.eye(F.dim) * (i == j)
            cross = max(cross, op_norm(a[i] @ a[j].conj().T + a[j].conj().T @ a[i] - want))
    rep.add(Check.residual_check("car.anticommute", "a(f)a(g) + a(g)a(f) = 0", anti, tol))
    rep.add(Check.residual_check("car.canonical", "a(f)a(g)* + a(g)*a(f) = <f, g> 1", cross, tol))
    rng = np.random.default_rng(0)
    f, g = (rng.normal(size=(2, F.d)) + 1j * rng.normal(size=(2, F.d)))
    lam = 0.3 - 0.7j
    lin = op_norm(F.annihilation(f + lam * g) - F.annihilation(f) - lam * F.annihilation(g))
    rep.add(Check.residual_check("car.linear", "a(f + lam g) = a(f) + lam a(g)", lin, tol))
    rnd = op_norm(F.annihilation(f) @ F.creation(g) + F.creation(g) @ F.annihilation(f)
                  - inner(f, g) * np.eye(F.dim))
    rep.add(Check.residual_check("car.canonical_random", "a(f)a(g)* + a(g)*a(f) = <f, g> 1 (random f, g)",
                                 rnd, tol))
    return rep


# --------------------------------------------------------------------------
# wedge products

def wedge_inner_product(fs: Sequence, gs: Sequence) -> complex:
    if len(fs) != len(gs):
        raise ValueError("wedge pairing needs equal particle numbers")
    n = len(fs)
    if n == 0:
        return 1.0 + 0j
    G = np.array([[inner(f, g) for g in gs] for f in fs])
    return complex(np.linalg.det(G) / math.factorial(n))


def antisymmetrized_tensor(fs: Sequence) -> np.ndarray:
    """``P_-(f_1 x ... x f_n)`` with ``P_- = (n!)^-1 sum_pi sign(pi) pi``."""
    n = len(fs)
    fs = [np.asarray(f, dtype=complex) for f in fs]
    out = 0
    for perm in itertools.permutations(range(n)):
        sign = np.linalg.det(np.eye(n)[list(perm)])
        t = fs[perm[0]]
        for k in perm[1:]:
            t = np.multiply.outer(t, fs[k])
        out = out + sign * t
    return np.asarray(out) / math.factorial(n)


def tensor_inner_product(fs: Sequence, gs: Sequence) -> complex:
    x = antisymmetrized_tensor(fs)
    y = antisymmetrized_tensor(gs)
    return complex(np.sum(x * np.conj(y)))


def wedge_state(F: FockSpace, fs: Sequence) -> np.ndarray:
    """``(n!)^-1/2 a*(f_1) ... a*(f_n) vacuum``."""
    v = F.vacuum.copy()
    for f in reversed(list(fs)):
        v = F.creation(f) @ v
    return v / math.sqrt(math.factorial(len(fs)))


def wedge_check(d: int = 4, max_n: int = 4, trials: int = 5, seed: int = 0, tol: float = CE_TOL) -> Report:
    rep = Report("wedge pairing")
    F = FockSpace(d)
    rng = np.random.default_rng(seed)
    tensor_gap = fock_gap = 0.0
    for n in range(1, max_n + 1):
        for _ in range(trials):
            fs = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
            gs = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
            w = wedge_inner_product(fs, gs)
            tensor_gap = max(tensor_gap, abs(w - tensor_inner_product(fs, gs)))
            # the map f -> a*(f) vacuum is antilinear, so the Fock pairing comes out conjugated
            fock_gap = max(fock_gap, abs(w - np.vdot(wedge_state(F, fs), wedge_state(F, gs))))
    rep.add(Check.residual_check("wedge.tensor_oracle", "det pairing equals the antisymmetrized tensor pairing",
                                 tensor_gap, tol))
    rep.add(Check.residual_check("wedge.fock", "det pairing equals the occupation-number pairing",
                                 fock_gap, tol))
    return rep


# --------------------------------------------------------------------------
# second quantization, Fock projection and the conditional expectation

def _minor_det(Q: np.ndarray, rows: tuple, cols: tuple) -> complex:
    if len(rows) != len(cols):
        return 0.0
    if not rows:
        return 1.0
    return complex(np.linalg.det(Q[np.ix_(rows, cols)]))


def second_quantize(F: FockSpace, Q) -> np.ndarray:
    """``Gamma(Q)``: ``c(f_1) ... c(f_n) vacuum -> c(Q f_1) ... c(Q f_n) vacuum``."""
    Q = np.asarray(Q, dtype=complex)
    if Q.shape != (F.d, F.d):
        raise ValueError(f"one-particle operator must be {F.d}x{F.d}")
    subsets = [F.subset(S) for S in range(F.dim)]
    out = np.zeros((F.dim, F.dim), complex)
    for S, s in enumerate(subsets):
        for T, t in enumerate(subsets):
            if len(s) == len(t):
                out[T, S] = _minor_det(Q, t, s)
    return out


def _check_projection(e, tol: float) -> np.ndarray:
    e = np.asarray(e, dtype=complex)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        raise ValueError("one-particle projection must be square")
    gap = max(op_norm(e - e.conj().T), op_norm(e @ e - e))
    if gap > tol:
        raise ValueError(f"not a projection: |e - e*| + |e^2 - e| = {gap:.3e}")
    return e


def fock_projection(F: FockSpace, e, tol: float = 1e-10) -> np.ndarray:
    """Projection onto the Fock space of ``range(e)``.

    With ``a`` linear the vector ``a*(f) vacuum`` has coordinates ``conj(f)``,
    hence the conjugate inside ``Gamma``.
    """
    e = _check_projection(e, tol)
    return second_quantize(F, e.conj())


def range_basis(e, tol: float = 1e-10) -> np.ndarray:
    w, U = np.linalg.eigh(np.asarray(e, dtype=complex))
    return U[:, w > 0.5]


def wick_basis(F: FockSpace, K: np.ndarray) -> list[np.ndarray]:
    """``a*(k_I) a(k_J)`` over subsets ``I, J`` of an orthonormal basis of ``K``."""
    r = K.shape[1]
    cre = [F.creation(K[:, i]) for i in range(r)]
    ann = [F.annihilation(K[:, i]) for i in range(r)]
    out = []
    for I in range(1 << r):
        left = np.eye(F.dim, dtype=complex)
        for i in F.subset(I):
            left = left @ cre[i]
        for J in range(1 << r):
            m = left
            for j in F.subset(J):
                m = m @ ann[j]
            out.append(m)
    return out


@dataclass
class CarExpectation:
    """``E`` onto the algebra generated by ``a(f)``, ``f`` in ``range(e)``.

    ``E(x)`` is the element ``y`` of that algebra with ``Ex E = y E`` where
    ``E`` is the Fock projection; equivalently ``R* y R = R* x R`` for an
    isometry ``R`` onto its range.
    """

    fock: FockSpace
    projection: np.ndarray
    fock_projection: np.ndarray = field(init=False)
    range_vectors: np.ndarray = field(init=False)
    basis: list = field(init=False, repr=False)
    _solve: np.ndarray = field(init=False, repr=False)
    isometry: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.projection = _check_projection(self.projection, 1e-10)
        self.fock_projection = fock_projection(self.fock, self.projection)
        self.range_vectors = range_basis(self.projection)
        w, U = np.linalg.eigh(self.fock_projection)
        self.isometry = U[:, w > 0.5]
        self.basis = wick_basis(self.fock, self.range_vectors)
        comp = np.column_stack([(self.isometry.conj().T @ m @ self.isometry).ravel() for m in self.basis])
        self._solve = np.linalg.inv(comp)

    def __call__(self, x) -> np.ndarray:
        c = self._solve @ (self.isometry.conj().T @ np.asarray(x) @ self.isometry).ravel()
        return np.tensordot(c, np.array(self.basis), axes=1)

    @cached_property
    def linmap(self) -> LinMap:
        # row-major vec(R* x R) = (R* kron R^T) vec(x); one block, so vec is ravel
        B = np.column_stack([m.ravel() for m in self.basis])
        return LinMap(self.fock.alg, B @ self._solve @ np.kron(self.isometry.conj().T, self.isometry.T))


def car_cond_exp(F: FockSpace, e) -> CarExpectation:
    return CarExpectation(F, np.asarray(e, dtype=complex))


def _random_vectors(rng, k: int, d: int) -> np.ndarray:
    return rng.normal(size=(k, d)) + 1j * rng.normal(size=(k, d))


def fock_projection_report(F: FockSpace, e, tol: float = FOCK_TOL, seed: int = 0) -> Report:
    rep = Report("Fock projection")
    e = _check_projection(e, 1e-10)
    P = fock_projection(F, e)
    rep.add(Check.residual_check("fock.projection", "Fock projection is an orthogonal projection",
                                 max(op_norm(P - P.conj().T), op_norm(P @ P - P)), tol))
    K = range_basis(e)
    target = np.column_stack([wedge_state(F, [K[:, i] for i in F.subset(S)])
                              for S in range(1 << K.shape[1])])
    rank = int(np.linalg.matrix_rank(P, tol=1e-8))
    span = op_norm(P @ target - target)
    rep.add(Check.residual_check("fock.range", "range is the Fock space of range(e)", span, tol,
                                 witness={"rank": rank, "expected": 1 << K.shape[1]}))
    rng = np.random.default_rng(seed)
    wedge_gap = 0.0
    for n in range(0, F.d + 1):
        fs = _random_vectors(rng, n, F.d)
        wedge_gap = max(wedge_gap, np.abs(P @ wedge_state(F, fs) - wedge_state(F, [e @ f for f in fs])).max())
    rep.add(Check.residual_check("fock.wedge", "projection maps f_1 ^ ... ^ f_n to e f_1 ^ ... ^ e f_n",
                                 wedge_gap, tol))
    fs = list(np.eye(F.d)) + list(_random_vectors(rng, 3, F.d))
    intertwine = max(op_norm(F.annihilation(f) @ P - P @ F.annihilation(e @ f)) for f in fs)
    rep.add(Check.residual_check("fock.intertwine", "a(f) E = E a(e f)", intertwine, tol))
    comm = max(op_norm(g @ P - P @ g) for i in range(K.shape[1])
               for g in (F.annihilation(K[:, i]), F.creation(K[:, i])))
    rep.add(Check.residual_check("fock.commutes", "generators of A(range e) commute with E", comm, tol))
    return rep


def car_expectation_report(F: FockSpace, e, tol: float = CE_TOL, seed: int = 0, samples: int = 20) -> Report:
    E = car_cond_exp(F, e)
    rep = Report("CAR conditional expectation")
    rng = np.random.default_rng(seed)
    P = E.fock_projection
    xs = [F.alg.random(rng) for _ in range(samples)]
    defn = max(op_norm(P @ x @ P - E(x) @ P) for x in xs)
    rep.add(Check.residual_check("carexp.defining", "E x E = E(x) E", defn, tol))
    fixes = max(op_norm(E(m) - m) for m in E.basis)
    rep.add(Check.residual_check("carexp.fixes_range", "E(x) = x on A(range e)", fixes, tol))
    idem = max(op_norm(E(E(x)) - E(x)) for x in xs)
    rep.add(Check.residual_check("carexp.idempotent", "E o E = E", idem, tol))
    bim = 0.0
    for _ in range(samples):
        cx, cy = rng.normal(size=(2, len(E.basis))) + 1j * rng.normal(size=(2, len(E.basis)))
        x = np.tensordot(cx, np.array(E.basis), axes=1)
        y = np.tensordot(cy, np.array(E.basis), axes=1)
        b = F.alg.random(rng)
        bim = max(bim, op_norm(E(x @ b @ y) - x @ E(b) @ y) / max(1.0, op_norm(x) * op_norm(y) * op_norm(b)))
    rep.add(Check.residual_check("carexp.bimodule", "E(x b y) = x E(b) y for x, y in A(range e)", bim, tol))
    wick = 0.0
    for n in range(3):
        for m in range(3):
            fs, gs = _random_vectors(rng, n, F.d), _random_vectors(rng, m, F.d)
            mono = np.eye(F.dim, dtype=complex)
            image = np.eye(F.dim, dtype=complex)
            for f in fs:
                mono, image = mono @ F.creation(f), image @ F.creation(E.projection @ f)
            for g in gs:
                mono, image = mono @ F.annihilation(g), image @ F.annihilation(E.projection @ g)
            wick = max(wick, op_norm(E(mono) - image))
    rep.add(Check.residual_check("carexp.wick", "E(a*(f_1)..a(g_m)) = a*(e f_1)..a(e g_m)", wick, tol))
    rep.extend(certify_checks("carexp.map", E.linmap, tol))
    return rep


# --------------------------------------------------------------------------
# truncated Hardy-space isometries

def shift(N: int) -> np.ndarray:
    if N < 2:
        raise ValueError("truncation size must be at least 2")
    return np.eye(N, k=-1, dtype=complex)


def blaschke_coefficients(a: complex, N: int) -> np.ndarray:
    """Taylor coefficients of ``(z - a) / (1 - conj(a) z)``."""
    if abs(a) >= 1:
        raise ValueError(f"need |a| < 1, got {a!r}")
    c = np.zeros(N, complex)
    c[0] = -a
    k = np.arange(1, N)
    c[1:] = (1 - abs(a) ** 2) * np.conj(a) ** (k - 1)
    return c


def blaschke_toeplitz(a: complex, N: int) -> np.ndarray:
    if N < 2:
        raise ValueError("truncation size must be at least 2")
    c = blaschke_coefficients(a, N)
    j, k = np.indices((N, N))
    return np.where(j >= k, c[np.clip(j - k, 0, N - 1)], 0)


def commutator_norm(p: np.ndarray, q: np.ndarray) -> float:
    """Norm of ``[p, q]`` for Hermitian ``p, q`` via the Hermitian ``i[p, q]``."""
    return float(np.abs(np.linalg.eigvalsh(1j * (p @ q - q @ p))).max())


def szego_kernel(a: complex, n: int) -> np.ndarray:
    """Unit vector spanning the kernel of the Toeplitz adjoint, cut to ``n`` terms."""
    k = np.conj(a) ** np.arange(n) if a != 0 else np.eye(n)[0]
    return k / np.linalg.norm(k)


def counterexample_pipeline(a: complex = 0.5, N: int = 64, tol: float = DELTA_THRESHOLD,
                            interior: int = INTERIOR, surrogate_d: int = 4) -> Report:
    if not 0 <= abs(a) < 1:
        raise ValueError(f"need 0 <= |a| < 1, got {a!r}")
    if N <= interior + 1:
        raise ValueError(f"N = {N} leaves no interior for a band of {interior}")
    rep = Report(f"Toeplitz counterexample a = {a}, N = {N}")
    s1, s2 = shift(N), blaschke_toeplitz(a, N)
    m = N - interior
    inner_block = lambda T: T[:m, :m]
    eye = np.eye(m)
    eps = 2 * abs(a) ** (2 * interior) + 1e-12
    for name, s in (("shift", s1), ("toeplitz", s2)):
        defect = op_norm(inner_block(s.conj().T @ s) - eye)
        rep.add(Check.residual_check(f"counterexample.{name}_isometry", "s* s = 1 on the interior",
                                     defect, eps, witness={"interior": m}))
    rep.add(Check.residual_check("counterexample.commute", "s1 s2 = s2 s1 on the interior",
                                 op_norm(inner_block(s1 @ s2 - s2 @ s1)), eps))
    p1, p2 = s1 @ s1.conj().T, s2 @ s2.conj().T
    commutator = commutator_norm(p1, p2)
    rep.data["range_commutator"] = commutator
    closed = abs(a) * math.sqrt(1 - abs(a) ** 2)
    rep.data["closed_form"] = closed

    # exact surrogate: the corank-one projections away from e_0 and the Szego kernel
    d = surrogate_d
    q1 = np.eye(d) - np.outer(np.eye(d)[0], np.eye(d)[0])
    k = szego_kernel(a, d)
    q2 = np.eye(d) - np.outer(k, k.conj())
    F = FockSpace(d)
    E1, E2 = car_cond_exp(F, q1), car_cond_exp(F, q2)
    rng = np.random.default_rng(0)
    fs = list(np.eye(d)) + list(_random_vectors(rng, 2, d))
    lift = max(op_norm(E(F.annihilation(f)) - F.annihilation(q @ f)) for E, q in ((E1, q1), (E2, q2))
               for f in fs)
    rep.add(Check.residual_check("counterexample.one_particle", "alpha ell (a(f)) = a(s s* f) on the surrogate",
                                 lift, CE_TOL))
    ok, witness, worst = commuting_expectations({(1, 0): E1.linmap, (0, 1): E2.linmap}, CE_TOL)
    rep.data["surrogate_commutator"] = worst
    rep.data["surrogate_range_commutator"] = commutator_norm(q1, q2)
    if commutator > tol:
        rep.add(Check("counterexample.range_commutator", "[s1 s1*, s2 s2*] is nonzero", PASS, residual=commutator, tol=tol))
        consistent = not ok and witness == ((1, 0), (0, 1))
        rep.add(Check("counterexample.surrogate", SURROGATE_ANCHOR,
                      PASS if consistent else FAIL, residual=worst, witness=witness))
        rep.add(Check("counterexample.no_extension", "no interaction group extends (alpha, ell)", FINDING,
                      residual=commutator, witness={"pair": ((1, 0), (0, 1)),
                                               "message": "no interaction group extends (alpha, ell)"}))
    else:
        rep.add(Check("counterexample.range_commutator", "[s1 s1*, s2 s2*] is nonzero", FINDING, residual=commutator, tol=tol,
                      witness="range projections commute, no obstruction at this parameter"))
        rep.add(Check("counterexample.surrogate", SURROGATE_ANCHOR,
                      PASS if ok else FAIL, residual=worst))
    return rep


def range_commutator(a: complex, N: int) -> float:
    return commutator_norm(shift(N) @ shift(N).conj().T,
                           blaschke_toeplitz(a, N) @ blaschke_toeplitz(a, N).conj().T)
