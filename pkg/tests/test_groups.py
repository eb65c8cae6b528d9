import pytest
from hypothesis import given, settings, strategies as st

from interaction_groups.groups import (EMonomial, FiniteGroup, FreeAbelianGroup, GroupError, cyclic, em_identity,
                                       em_idempotent, em_leq, em_mul, em_star, nf, symmetric, word_dot,
                                       word_inverse, word_mu)

S3 = symmetric(3)
Z2 = FreeAbelianGroup(2)


def test_cyclic_table():
    G = cyclic(4)
    assert G.mul(3, 2) == 1
    assert G.inv(1) == 3
    assert G.identity == 0


def test_symmetric_inverses():
    assert [S3.inv(g) for g in S3.elements()] == [0, 1, 2, 4, 3, 5]


def test_non_associative_table_rejected():
    # a Latin square that is not a group
    table = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(GroupError):
        FiniteGroup(table)


def test_free_abelian_canon():
    assert Z2.canon([1, -2]) == (1, -2)
    assert FreeAbelianGroup(1).canon((3,)) == 3
    with pytest.raises(GroupError):
        Z2.canon((1, 2, 3))
    with pytest.raises(GroupError):
        FreeAbelianGroup(1).canon(True)


def test_word_entry_outside_group():
    with pytest.raises(GroupError):
        nf(cyclic(3), [1, 5])


def test_empty_word_is_identity():
    assert nf(S3, ()) == em_identity(S3)


def test_mu_and_dot():
    assert word_mu(cyclic(4), (1, 1, 1)) == frozenset({0, 1, 2, 3})
    assert word_dot(cyclic(4), (1, 1, 1)) == 3


def test_emonomial_make_validates():
    with pytest.raises(GroupError):
        EMonomial.make(cyclic(3), [1], 1)
    assert EMonomial.make(cyclic(3), [2, 0], 2).support == (0, 2)


def test_em_leq():
    a, b = nf(cyclic(4), (1,)), nf(cyclic(4), (1, 1))
    assert em_leq(a, b) and not em_leq(b, a)


letters_z2 = st.sampled_from(Z2.generators())
letters_s3 = st.sampled_from(S3.elements())


@settings(max_examples=200, deadline=None)
@given(st.lists(letters_s3, max_size=6), st.lists(letters_s3, max_size=6))
def test_nf_is_a_homomorphism_s3(a, b):
    assert nf(S3, tuple(a) + tuple(b)) == em_mul(S3, nf(S3, a), nf(S3, b))


@settings(max_examples=200, deadline=None)
@given(st.lists(letters_z2, max_size=6), st.lists(letters_z2, max_size=6))
def test_nf_is_a_homomorphism_z2(a, b):
    assert nf(Z2, tuple(a) + tuple(b)) == em_mul(Z2, nf(Z2, a), nf(Z2, b))


@settings(max_examples=200, deadline=None)
@given(st.lists(letters_z2, max_size=8))
def test_star_is_word_inverse(a):
    x = nf(Z2, a)
    assert em_star(Z2, x) == nf(Z2, word_inverse(Z2, a))
    assert em_star(Z2, em_star(Z2, x)) == x


@settings(max_examples=150, deadline=None)
@given(st.lists(letters_s3, max_size=5), st.lists(letters_s3, max_size=5), st.lists(letters_s3, max_size=5))
def test_em_mul_associative(a, b, c):
    x, y, z = nf(S3, a), nf(S3, b), nf(S3, c)
    assert em_mul(S3, em_mul(S3, x, y), z) == em_mul(S3, x, em_mul(S3, y, z))


@settings(max_examples=150, deadline=None)
@given(st.lists(letters_s3, max_size=6))
def test_partial_isometry_and_range(a):
    x = nf(S3, a)
    assert em_mul(S3, em_mul(S3, x, em_star(S3, x)), x) == x
    assert em_mul(S3, x, em_star(S3, x)) == em_idempotent(S3, x)
    assert x.is_valid(S3)
