import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interaction_groups.algebra import AlgState, FdAlgebra
from interaction_groups.covariance import (StateRejected, amplify, build_subspaces, corrupted_rep,
                                           crossed_product_concrete, direct_norm, find_redundancies,
                                           gns_from_state, gns_report, norm_formula, redundancy_scan,
                                           subspace_report, two_model_check, verify_covariant)
from interaction_groups.groups import cyclic
from interaction_groups.instances import cyclic_shift_z3, flip_expectation_z2, identity_interaction
from interaction_groups.modules import regular_rep


@pytest.fixture(scope="module")
def gns():
    ig = flip_expectation_z2()
    return gns_from_state(ig, AlgState.trace(ig.alg))


def test_gns_report_passes():
    ig = flip_expectation_z2()
    rep, out = gns_report(ig, AlgState.trace(ig.alg))
    assert out.ok
    assert rep.meta["gram_scalar"]
    assert np.array_equal(rep.isometry(1) @ rep.cyclic, rep.cyclic)


def test_non_invariant_state_is_rejected_with_witness():
    ig = flip_expectation_z2()
    with pytest.raises(StateRejected) as info:
        gns_from_state(ig, AlgState(ig.alg, np.diag([0.9, 0.1])))
    assert info.value.element == 1
    assert "not invariant under V_1" in str(info.value)


def test_non_faithful_state_is_rejected():
    ig = flip_expectation_z2()
    with pytest.raises(StateRejected):
        gns_from_state(ig, AlgState(ig.alg, np.diag([1.0, 0.0])))


def test_regular_rep_is_covariant():
    assert verify_covariant(regular_rep(flip_expectation_z2())).ok
    assert verify_covariant(regular_rep(cyclic_shift_z3())).ok


def test_subspaces(gns):
    out = subspace_report(gns)
    assert out.ok
    subs = build_subspaces(gns, (1, 1))
    assert subs.algebra.stable


def test_no_redundancies_and_negative_control(gns):
    assert redundancy_scan(gns).ok
    bad = find_redundancies(corrupted_rep(gns), (1,))
    assert bad.kernel_dim > 0
    assert redundancy_scan(corrupted_rep(gns), expect_zero=False)["redundancy.found"].status == "finding"


def test_crossed_product_grading(gns):
    cp = crossed_product_concrete(amplify(gns))
    assert cp.report.ok
    assert cp.algebra.dim == sum(C.dim for C in cp.components.values())


def test_identity_interaction_on_scalars():
    ig = identity_interaction(cyclic(2), FdAlgebra([1]))
    rep = gns_from_state(ig, AlgState.trace(ig.alg))
    cp = crossed_product_concrete(amplify(rep))
    assert cp.algebra.dim == 2


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.sampled_from([(1,), (1, 1), (1, 1, 1)]))
def test_norm_recipe_matches_direct_norm(seed, n, word):
    ig = flip_expectation_z2()
    rep = gns_from_state(ig, AlgState.trace(ig.alg))
    rng = np.random.default_rng(seed)
    a = [ig.alg.random(rng) for _ in range(n)]
    b = [ig.alg.random(rng) for _ in range(n)]
    assert abs(norm_formula(ig, word, a, b) - direct_norm(rep, word, a, b)) < 1e-7


def test_two_models(gns):
    assert two_model_check(gns, regular_rep(flip_expectation_z2())).ok
