import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interaction_groups.algebra import (AlgebraError, AlgState, FdAlgebra, LinMap, Subspace, cond_exp_check,
                                        generated_star_algebra, is_conditional_expectation, map_certify)
from interaction_groups.instances import ad, diagonal_expectation, m2, random_unitary

blocks = st.lists(st.integers(1, 3), min_size=1, max_size=3)


@settings(max_examples=40, deadline=None)
@given(blocks, st.integers(0, 2**32 - 1))
def test_vec_roundtrip_and_star(sizes, seed):
    A = FdAlgebra(sizes)
    a = A.random(np.random.default_rng(seed))
    assert np.allclose(A.unvec(A.vec(a)), a)
    assert np.allclose(A.unvec(A.star_vec(A.vec(a))), a.conj().T)


@settings(max_examples=40, deadline=None)
@given(blocks, st.integers(0, 2**32 - 1))
def test_multiplication_matrices(sizes, seed):
    A = FdAlgebra(sizes)
    rng = np.random.default_rng(seed)
    a, b = A.random(rng), A.random(rng)
    assert np.allclose(A.left_mult(a) @ A.vec(b), A.vec(a @ b))
    assert np.allclose(A.right_mult(a) @ A.vec(b), A.vec(b @ a))


def test_element_rejects_off_block_entries():
    A = FdAlgebra([1, 1])
    with pytest.raises(AlgebraError):
        A.element([[1, 1], [0, 1]])


def test_transpose_is_positive_not_cp():
    A = m2()
    cert = map_certify(LinMap.from_function(A, lambda a: a.T))
    assert cert.level == "positive-unverified"


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10_000))
def test_ad_is_cp(n, seed):
    A = FdAlgebra([n])
    assert map_certify(ad(A, random_unitary(n, seed))).level == "cp-certified"


def test_subspace_extend_ignores_rounding_noise():
    S = Subspace.span([np.eye(2).ravel()])
    noisy = np.eye(2).ravel() * (1 + 1e-16) + 1e-17
    assert S.extend([noisy]).dim == 1


def test_subspace_intersection_and_sum():
    e = np.eye(3)
    U = Subspace.span([e[0], e[1]])
    W = Subspace.span([e[1], e[2]])
    assert U.intersect(W).dim == 1
    assert (U + W).dim == 3


@pytest.mark.parametrize("gens, dim", [
    ([np.array([[0, 1], [0, 0]])], 4),
    ([np.diag([1.0, 0.0])], 2),
    ([np.eye(2)], 1),
])
def test_generated_algebra_dimensions(gens, dim):
    assert generated_star_algebra(gens).dim == dim


def test_diagonal_expectation_is_faithful_conditional_expectation():
    rep = cond_exp_check(diagonal_expectation(m2()))
    assert rep.ok
    assert rep.data["range_dim"] == 2
    assert np.isclose(rep.data["gram_min_eig"], 0.5)


def test_non_idempotent_map_is_not_an_expectation():
    A = m2()
    assert not is_conditional_expectation(LinMap(A, 0.5 * np.eye(A.d)))


def test_state_validation():
    A = m2()
    with pytest.raises(AlgebraError):
        AlgState(A, np.diag([1.0, 1.0]))
    assert AlgState.trace(A).is_faithful()
    assert not AlgState(A, np.diag([1.0, 0.0])).is_faithful()
