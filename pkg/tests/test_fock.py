import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interaction_groups.fock import (FockSpace, antisymmetrized_tensor, blaschke_coefficients, blaschke_toeplitz,
                                     car_check, car_cond_exp, counterexample_pipeline, range_commutator, fock_projection,
                                     inner, second_quantize, shift, wedge_inner_product, wedge_state)


def test_single_mode_annihilator():
    assert np.array_equal(FockSpace(1).annihilation([1]), np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("d", range(1, 7))
def test_car_relations_exact(d):
    assert car_check(FockSpace(d)).ok


vec3 = st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=3, max_size=3)


@settings(max_examples=50, deadline=None)
@given(vec3, vec3)
def test_car_random_vectors(f, g):
    F = FockSpace(3)
    a, b = F.annihilation(f), F.annihilation(g)
    assert np.abs(a @ a).max() < 1e-12
    assert np.abs(a @ b + b @ a).max() < 1e-10
    assert np.abs(a @ b.conj().T + b.conj().T @ a - inner(f, g) * np.eye(8)).max() < 1e-10


def test_wedge_pairing_examples():
    e = np.eye(3)
    assert np.isclose(wedge_inner_product([e[0], e[1]], [e[0], e[1]]), 0.5)
    f = np.array([1, 2j, 0])
    assert wedge_inner_product([f, f], [e[0], e[1]]) == 0
    g = np.array([1, 1, 1j])
    want = (np.linalg.norm(f) ** 2 * np.linalg.norm(g) ** 2 - abs(inner(f, g)) ** 2) / 2
    assert np.isclose(wedge_inner_product([f, g], [f, g]), want)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_wedge_pairing_against_tensor_oracle(n, seed):
    rng = np.random.default_rng(seed)
    fs = rng.normal(size=(n, 4)) + 1j * rng.normal(size=(n, 4))
    gs = rng.normal(size=(n, 4)) + 1j * rng.normal(size=(n, 4))
    oracle = np.sum(antisymmetrized_tensor(fs) * np.conj(antisymmetrized_tensor(gs)))
    assert abs(wedge_inner_product(fs, gs) - oracle) < 1e-10
    F = FockSpace(4)
    assert abs(np.vdot(wedge_state(F, fs), wedge_state(F, gs)) - oracle) < 1e-10


def test_occupation_states_rescale_wedges():
    F = FockSpace(3)
    e = np.eye(3)
    v = wedge_state(F, [e[0], e[2]])
    assert np.isclose(v[0b101] * math.sqrt(2), 1)


@pytest.mark.parametrize("e, rank", [(np.eye(3), 8), (np.zeros((3, 3)), 1)])
def test_fock_projection_extremes(e, rank):
    P = fock_projection(FockSpace(3), e)
    assert np.linalg.matrix_rank(P) == rank


def test_fock_projection_single_mode():
    P = fock_projection(FockSpace(2), np.diag([1, 0]))
    assert np.array_equal(np.diag(P).real, np.array([1, 1, 0, 0]))


def test_fock_projection_requires_projection():
    with pytest.raises(ValueError):
        fock_projection(FockSpace(2), np.array([[1, 1], [0, 0]]))


def test_second_quantize_is_multiplicative():
    rng = np.random.default_rng(2)
    F = FockSpace(3)
    P, Q = rng.normal(size=(2, 3, 3))
    assert np.allclose(second_quantize(F, P @ Q), second_quantize(F, P) @ second_quantize(F, Q))


def test_car_expectation_examples():
    F = FockSpace(2)
    E = car_cond_exp(F, np.diag([1, 0]))
    x = F.creation([0, 1]) @ F.annihilation([0, 1])
    assert np.abs(E(x)).max() < 1e-12
    f = np.array([1, 2 - 1j])
    assert np.allclose(E(F.annihilation(f)), F.annihilation(np.array([1, 0])))
    a1 = F.annihilation([1, 0])
    assert np.allclose(E(a1 @ a1.conj().T), a1 @ a1.conj().T)


def test_blaschke_coefficients():
    assert np.allclose(blaschke_coefficients(0.5, 4), [-0.5, 0.75, 0.375, 0.1875])


def test_blaschke_series_oracle():
    # (1 - a z) phi(z) = z - a as power series
    a, N = 0.3 - 0.2j, 12
    c = blaschke_coefficients(a, N)
    lhs = c - np.conj(a) * np.concatenate([[0], c[:-1]])
    want = np.zeros(N, complex)
    want[0], want[1] = -a, 1
    assert np.allclose(lhs, want)


def test_shift_defect_in_last_coordinate():
    s = shift(6)
    assert np.array_equal(s.conj().T @ s, np.diag([1, 1, 1, 1, 1, 0]))


def test_toeplitz_domain():
    with pytest.raises(ValueError):
        blaschke_toeplitz(1.0, 10)
    with pytest.raises(ValueError):
        shift(1)


def test_truncated_analytic_toeplitz_commute():
    s1, s2 = shift(20), blaschke_toeplitz(0.5, 20)
    assert np.abs(s1 @ s2 - s2 @ s1).max() < 1e-14


@pytest.mark.parametrize("a", [0.5, 0.3j, -0.7])
def test_delta_closed_form(a):
    assert abs(range_commutator(a, 64) - abs(a) * math.sqrt(1 - abs(a) ** 2)) < 1e-12


def test_counterexample_report():
    rep = counterexample_pipeline(0.5, 32)
    finding = rep["counterexample.no_extension"]
    assert finding.status == "finding"
    assert finding.witness["pair"] == [[1, 0], [0, 1]]
    assert rep.ok


def test_counterexample_at_zero_has_no_obstruction():
    rep = counterexample_pipeline(0.0, 32)
    assert rep.data["range_commutator"] < 1e-8
    assert "counterexample.no_extension" not in rep
    assert rep["counterexample.surrogate"].passed


def test_counterexample_domain():
    with pytest.raises(ValueError):
        counterexample_pipeline(0.5, 8)
