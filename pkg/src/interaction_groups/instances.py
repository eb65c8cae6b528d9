"""Small named interaction groups used by tests, scripts and bundled configs."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .algebra import FdAlgebra, LinMap
from .groups import FreeAbelianGroup, Group, cyclic
from .interaction import InteractionGroup, commuting_power_rule

FLIP = np.array([[0, 1], [1, 0]], dtype=complex)


def m2() -> FdAlgebra:
    return FdAlgebra([2])


def diagonal_expectation(alg: FdAlgebra) -> LinMap:
    return LinMap.from_function(alg, lambda a: np.diag(np.diag(a)))


def flip_expectation_map(alg: FdAlgebra | None = None) -> LinMap:
    """``a -> diag(a22, a11)`` on M_2."""
    alg = alg or m2()
    return LinMap.from_function(alg, lambda a: np.diag([a[1, 1], a[0, 0]]))


def flip_expectation_z2() -> InteractionGroup:
    """The canonical ``Z_2`` interaction on ``M_2``: ``V_1`` squares to the diagonal expectation."""
    alg = m2()
    return InteractionGroup(cyclic(2), alg, {1: flip_expectation_map(alg)}, name="m2_z2_flip")


def identity_interaction(G: Group, alg: FdAlgebra) -> InteractionGroup:
    if G.finite:
        return InteractionGroup(G, alg, {g: LinMap.identity(alg) for g in G.window()}, name="identity")
    return InteractionGroup(G, alg, rule=lambda g: LinMap.identity(alg), name="identity")


def transpose_z2() -> InteractionGroup:
    alg = m2()
    return InteractionGroup(cyclic(2), alg, {1: LinMap.from_function(alg, lambda a: a.T)},
                            name="transpose")


def ad(alg: FdAlgebra, u: np.ndarray) -> LinMap:
    uc = u.conj().T
    return LinMap.from_function(alg, lambda a: u @ a @ uc)


def flip_automorphism_z2() -> InteractionGroup:
    alg = m2()
    return InteractionGroup(cyclic(2), alg, {1: ad(alg, FLIP)}, name="flip_automorphism")


def ad_power_z(u: np.ndarray) -> InteractionGroup:
    """``V_n = Ad(u^n)`` on ``M_k`` for the group ``Z``."""
    alg = FdAlgebra([u.shape[0]])
    Z = FreeAbelianGroup(1)
    rule = commuting_power_rule(Z, {1: ad(alg, u), -1: ad(alg, u.conj().T)})
    return InteractionGroup(Z, alg, rule=rule, name="ad_power")


def random_unitary(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if n == 1:
        # scipy's sampler needs n >= 2
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(n, random_state=rng)


def commuting_unitaries(n: int, k: int, seed: int) -> list[np.ndarray]:
    """``k`` commuting unitaries diagonal in one random basis."""
    rng = np.random.default_rng(seed)
    W = unitary_group.rvs(n, random_state=rng)
    return [W @ np.diag(np.exp(2j * np.pi * rng.random(n))) @ W.conj().T for _ in range(k)]


def commuting_automorphisms_z2(n: int = 2, seed: int = 7) -> InteractionGroup:
    """``V_(p,q) = Ad(u1^p u2^q)`` for the group ``Z^2``."""
    u1, u2 = commuting_unitaries(n, 2, seed)
    alg = FdAlgebra([n])
    G = FreeAbelianGroup(2)
    gens = {(1, 0): ad(alg, u1), (-1, 0): ad(alg, u1.conj().T),
            (0, 1): ad(alg, u2), (0, -1): ad(alg, u2.conj().T)}
    return InteractionGroup(G, alg, rule=commuting_power_rule(G, gens), name="commuting_ad_z2")


def cyclic_shift_z3() -> InteractionGroup:
    """``Z_3`` permuting the three summands of ``C^3``."""
    alg = FdAlgebra([1, 1, 1])
    P = np.roll(np.eye(3), 1, axis=0)
    table = {k: LinMap(alg, np.linalg.matrix_power(P, k)) for k in range(3)}
    return InteractionGroup(cyclic(3), alg, table, name="cyclic_shift")
