import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interaction_groups.algebra import AlgState, FdAlgebra, LinMap
from interaction_groups.extension import (check_transfer, commuting_expectations, construct_V, extension_exists,
                                          factorizations, free_abelian_system, linear_order_extension,
                                          single_endo_extend, uniqueness_check, verify_system)
from interaction_groups.instances import FLIP, ad, commuting_unitaries, diagonal_expectation, m2, random_unitary


def test_transfer_examples():
    A = m2()
    flip = ad(A, FLIP)
    assert check_transfer(LinMap.identity(A), LinMap.identity(A)).ok
    assert check_transfer(flip, flip).ok
    bad = check_transfer(flip, diagonal_expectation(A) @ flip)
    assert not bad["transfer.law"].passed


def test_single_generator_always_extends():
    A = FdAlgebra([2])
    u = random_unitary(2, 1)
    ok, witness, _ = extension_exists(free_abelian_system(A, [ad(A, u)], [ad(A, u.conj().T)]), radius=3)
    assert ok and witness is None


def test_commuting_expectations_witness():
    A = m2()
    D = diagonal_expectation(A)
    t = np.pi / 8
    R = ad(A, np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]))
    tilted = R @ D @ ad(A, np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]]))
    ok, witness, worst = commuting_expectations({"a": D, "b": tilted, "c": D})
    assert not ok and witness == ("a", "b") and worst > 0.1


def test_factorizations_sorted_by_length():
    A = FdAlgebra([1])
    sys = free_abelian_system(A, [LinMap.identity(A)] * 2, [LinMap.identity(A)] * 2)
    fs = factorizations(sys, (1, -1), radius=3)
    assert fs[0] == ((0, 1), (1, 0))
    assert len(fs) >= 2


def test_z2_commuting_automorphisms():
    B = FdAlgebra([2])
    us = commuting_unitaries(2, 2, seed=7)
    sys = free_abelian_system(B, [ad(B, x) for x in us], [ad(B, x.conj().T) for x in us])
    assert verify_system(sys).ok
    built = construct_V(sys, radius=2)
    assert built.report.ok
    V = built.ig
    direct = ad(B, np.linalg.matrix_power(us[0], 2) @ np.linalg.matrix_power(us[1].conj().T, 1))
    assert V.map((2, -1)).dist(direct) < 1e-10


@pytest.mark.parametrize("alpha", ["identity", "flip"])
def test_single_endo_trivial(alpha):
    A = m2()
    a = LinMap.identity(A) if alpha == "identity" else ad(A, FLIP)
    out = single_endo_extend(a, LinMap.identity(A), window=3)
    assert out.report.ok
    assert out.ig.map(-3).dist(a.power(3)) < 1e-12


def test_single_endo_rejections():
    A = m2()
    with pytest.raises(ValueError, match="range of E"):
        single_endo_extend(ad(A, FLIP), diagonal_expectation(A))
    with pytest.raises(ValueError):
        single_endo_extend(diagonal_expectation(A), diagonal_expectation(A))


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_two_pipelines_agree(seed):
    A = FdAlgebra([2])
    u = random_unitary(2, seed)
    alpha, ell = ad(A, u), ad(A, u.conj().T)
    single = single_endo_extend(alpha, LinMap.identity(A), window=3)
    built = construct_V(free_abelian_system(A, [alpha], [ell]), radius=3)
    rep = uniqueness_check(single.ig, built.ig, AlgState.trace(A), window=3)
    assert rep["uniqueness.compare"].status == "pass"
    assert rep["uniqueness.rebuild"].passed


def test_uniqueness_self_and_negative_control():
    A = FdAlgebra([2])
    u = random_unitary(2, 5)
    alpha, ell = ad(A, u), ad(A, u.conj().T)
    V = linear_order_extension(A, alpha, ell)
    assert uniqueness_check(V, V, AlgState.trace(A))["uniqueness.compare"].residual == 0.0
    broken = linear_order_extension(A, alpha, LinMap(A, ell.mat + 0.01 * np.eye(A.d)))
    assert uniqueness_check(V, broken, AlgState.trace(A))["uniqueness.compare"].status == "skipped"
