import numpy as np
import pytest

from interaction_groups.algebra import op_norm
from interaction_groups.instances import commuting_automorphisms_z2, flip_expectation_z2, identity_interaction
from interaction_groups.groups import cyclic
from interaction_groups.algebra import FdAlgebra
from interaction_groups.modules import (HModule, NotAdjointable, adjoint, extension_functoriality,
                                        fell_bundle_report, module_norm, module_op_norm, module_suite, regular_rep,
                                        shat)


def test_module_norm_at_identity_is_operator_norm():
    ig = flip_expectation_z2()
    H = HModule(ig, [0])
    x = np.array([[1, 2], [0, 1j]])
    assert np.isclose(module_norm(H, x), op_norm(x))
    assert np.isclose(module_norm(HModule(ig, [0, 1]), np.eye(2)), 1.0)


def test_shat_self_adjoint_on_canonical_example():
    ig = flip_expectation_z2()
    T = shat(ig, 1, [0, 1])
    assert np.allclose(T.linmap.mat, ig.map(1).mat)
    assert np.allclose(adjoint(T).linmap.mat, T.linmap.mat)


def test_identity_interaction_shat_is_identity():
    ig = identity_interaction(cyclic(3), FdAlgebra([2]))
    T = shat(ig, 2, [0, 1])
    assert np.allclose(T.linmap.mat, np.eye(4))


def test_missing_inverse_rejects_adjoint():
    ig = flip_expectation_z2()
    with pytest.raises(NotAdjointable):
        adjoint(adjoint(shat(ig, 1, [0])))
    with pytest.raises(ValueError):
        module_suite(ig, 1, [0])


def test_norms_agree_across_routes():
    ig = commuting_automorphisms_z2()
    nr = module_op_norm(shat(ig, (1, 0), [(0, 0), (-1, 0)]))
    assert nr.discrepancy < 1e-8
    assert nr.sampled_sup <= nr.norm + 1e-8


def test_module_suite_z2():
    ig = commuting_automorphisms_z2()
    assert module_suite(ig, (1, -1), [(0, 0), (-1, 1)], Y=[(0, 0), (-1, 1), (2, 0)]).ok


def test_extension_functoriality():
    ig = commuting_automorphisms_z2()
    X = [(0, 0), (-1, 0), (-1, -1)]
    Y = X + [(1, 1)]
    assert extension_functoriality(ig, (1, 0), (0, 1), X, Y, Z=Y + [(2, 2)]).ok


def test_fell_bundle_canonical():
    assert fell_bundle_report(flip_expectation_z2()).ok


def test_regular_rep_needs_finite_group():
    with pytest.raises(ValueError):
        regular_rep(commuting_automorphisms_z2())
