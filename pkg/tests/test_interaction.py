import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interaction_groups.algebra import FdAlgebra, LinMap
from interaction_groups.groups import FreeAbelianGroup, cyclic, symmetric
from interaction_groups.instances import (ad_power_z, commuting_automorphisms_z2, cyclic_shift_z3,
                                          flip_expectation_z2, identity_interaction, random_unitary, transpose_z2)
from interaction_groups.interaction import (InteractionGroup, check_expectation_X, check_nondegenerate,
                                            full_interaction_report, nondegenerate_check, schwarz_check,
                                            verify_interaction, verify_partial_rep)


def test_canonical_example_squares_to_diagonal_expectation():
    ig = flip_expectation_z2()
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.allclose(ig.expectation(1)(a), np.diag([1, 4]))
    assert full_interaction_report(ig).ok


@pytest.mark.parametrize("make, window", [
    (cyclic_shift_z3, None),
    (lambda: commuting_automorphisms_z2(), 1),
    (lambda: ad_power_z(random_unitary(2, 4)), 2),
    (lambda: identity_interaction(symmetric(3), FdAlgebra([1, 2])), None),
])
def test_examples_pass(make, window):
    assert full_interaction_report(make(), window, word_length=2).ok


def test_transpose_is_a_partial_rep_but_not_an_interaction():
    ig = transpose_z2()
    assert verify_partial_rep(ig).ok
    rep = verify_interaction(ig, 1)
    failed = {c.id for c in rep.failures}
    assert "interaction.map.cp" in failed
    # transpose reverses products, so it is not multiplicative on M_2
    assert "interaction.multiplicative" in failed
    assert not schwarz_check(ig, 1).passed


def test_nondegenerate_is_undefined_without_expectation():
    alg = FdAlgebra([2])
    # a -> (a + tau(a) 1) / 2 is unital and cp, but its square is not idempotent
    tau = np.outer(alg.vec(np.eye(2)), alg.vec(np.eye(2))) / 2
    half = LinMap(alg, 0.5 * np.eye(alg.d) + 0.5 * tau)
    ig = InteractionGroup(cyclic(2), alg, {1: half})
    assert check_nondegenerate(ig, 1) is None
    assert nondegenerate_check(ig, 1).status == "skipped"


def test_partial_rep_failure_is_reported():
    alg = FdAlgebra([2])
    ig = InteractionGroup(cyclic(2), alg, {1: LinMap(alg, 2 * np.eye(alg.d))})
    assert not verify_partial_rep(ig).ok


def test_table_must_cover_finite_group():
    alg = FdAlgebra([1])
    with pytest.raises(ValueError):
        InteractionGroup(cyclic(3), alg, {1: LinMap.identity(alg)})


def test_expectation_X_is_order_independent():
    ig = commuting_automorphisms_z2()
    assert check_expectation_X(ig, [(0, 0), (1, 0), (0, -1)], window=1).ok


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.integers(-3, 3))
def test_ad_powers_compose(seed, n):
    ig = ad_power_z(random_unitary(2, seed))
    assert ig.map(n).dist(ig.map(1).power(n) if n >= 0 else ig.map(-1).power(-n)) < 1e-10
    assert ig.expectation(n).dist(LinMap.identity(ig.alg)) < 1e-10
