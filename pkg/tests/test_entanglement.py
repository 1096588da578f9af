import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from excitonium.entanglement import (
    closest_separable,
    concurrence,
    concurrence_matrix,
    diagonal_entropy,
    entanglement_report,
    global_entanglement,
    is_entangled,
    relative_entropy,
    von_neumann_entropy,
    witness,
)
from excitonium.hamiltonian import InvalidStateError

from helpers import bell, random_diagonal, random_state

LN2 = math.log(2.0)


def _mixed_example():
    return 0.7 * bell() + 0.3 * np.diag([0.5, 0.5])


def _logm_relative_entropy(rho, sigma):
    # brute-force oracle through the matrix logarithm
    return float(np.trace(rho @ (scipy.linalg.logm(rho) - scipy.linalg.logm(sigma))).real)


def test_concurrence_examples():
    # sites are 1-based
    assert concurrence(bell(), 1, 2) == pytest.approx(1.0)
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 1] = 0.3 - 0.1j
    rho[1, 0] = 0.3 + 0.1j
    assert concurrence(rho, 1, 2) == pytest.approx(0.632456, abs=1e-6)
    assert concurrence(rho, 2, 1) == concurrence(rho, 1, 2)
    np.testing.assert_array_equal(concurrence_matrix(np.diag([0.2, 0.3, 0.5])), 0.0)
    with pytest.raises(ValueError):
        concurrence(rho, 1, 1)
    with pytest.raises(IndexError):
        concurrence(rho, 1, 4)


def test_witness_examples():
    assert witness(np.diag([0.5, 0.5])) == 0.0
    assert witness(bell()) == pytest.approx(0.5)
    psi = np.ones(7) / np.sqrt(7)
    assert witness(np.outer(psi, psi)) == pytest.approx(3.0)


def test_closest_separable_examples():
    np.testing.assert_allclose(closest_separable(bell(3)), np.diag([0.5, 0.5, 0.0]))
    d = np.diag([0.1, 0.6, 0.3])
    np.testing.assert_array_equal(closest_separable(d), d)


def test_von_neumann_entropy_examples():
    assert von_neumann_entropy(bell()) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(np.diag([0.5, 0.5])) == pytest.approx(LN2)
    ev = np.linalg.eigvalsh(_mixed_example())
    np.testing.assert_allclose(ev, [0.15, 0.85], atol=1e-14)
    # -0.85 ln 0.85 - 0.15 ln 0.15
    assert von_neumann_entropy(_mixed_example()) == pytest.approx(0.422709, abs=1e-6)


def test_global_entanglement_examples():
    psi = np.ones(7) / np.sqrt(7)
    assert global_entanglement(np.outer(psi, psi)) == pytest.approx(math.log(7), abs=1e-12)
    assert global_entanglement(bell()) == pytest.approx(LN2, abs=1e-12)
    rho = _mixed_example()
    # brute force: diagonal entropy minus the matrix-log entropy
    p = np.diag(rho).real
    ref = -np.sum(p * np.log(p)) + np.trace(rho @ scipy.linalg.logm(rho)).real
    assert ref == pytest.approx(0.270438, abs=1e-6)
    assert global_entanglement(rho) == pytest.approx(ref, abs=1e-12)


def test_relative_entropy_examples():
    rho = _mixed_example()
    assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert relative_entropy(bell(), np.diag([0.5, 0.5])) == pytest.approx(LN2, abs=1e-12)
    expect = 0.6 * math.log(1.2) + 0.4 * math.log(0.8)
    assert expect == pytest.approx(0.020136, abs=1e-6)
    assert relative_entropy(np.diag([0.6, 0.4]), np.diag([0.5, 0.5])) == pytest.approx(expect)
    # support of rho not contained in support of sigma
    assert relative_entropy(np.diag([0.5, 0.5]), np.diag([1.0, 0.0])) == math.inf


def test_relative_entropy_matches_matrix_log_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        rho = random_state(rng, 4)
        sigma = random_state(rng, 4)
        assert relative_entropy(rho, sigma) == pytest.approx(
            _logm_relative_entropy(rho, sigma), abs=1e-9)


def test_global_entanglement_is_relative_entropy_to_dephased_state():
    rng = np.random.default_rng(11)
    for _ in range(50):
        rho = random_state(rng, 5, trace=rng.uniform(0.2, 1.0))
        assert global_entanglement(rho) == pytest.approx(
            relative_entropy(rho, closest_separable(rho)), abs=1e-10)


def test_eigenvalue_clamp_window():
    rho = np.diag([0.5, 0.5 + 5e-10, -5e-10]).astype(complex)
    assert global_entanglement(rho) == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(InvalidStateError):
        von_neumann_entropy(np.diag([1.0, -1e-6]))
    with pytest.raises(InvalidStateError):
        diagonal_entropy(np.diag([1.0, -1e-6]))


def test_is_entangled_threshold():
    assert not is_entangled(np.diag([0.4, 0.6]))
    for value, expect in ((1e-3, True), (1e-12, False)):
        rho = np.diag([0.5, 0.5]).astype(complex)
        rho[0, 1] = rho[1, 0] = value
        assert is_entangled(rho, tol=1e-10) is expect
    assert not is_entangled(np.ones((1, 1)))


def test_report():
    r = entanglement_report(bell(3))
    assert r.global_E == pytest.approx(LN2)
    assert r.witness_W == pytest.approx(0.5)
    assert r.is_entangled
    assert r.trace == pytest.approx(1.0)
    assert r.pairwise[0, 1] == pytest.approx(1.0)
    row = r.as_row()
    assert row[:3] == [r.trace, r.global_E, r.witness_W]
    assert len(row) == 3 + 3


@st.composite
def states(draw):
    n = draw(st.integers(2, 7))
    seed = draw(st.integers(0, 2**32 - 1))
    rank = draw(st.integers(1, n))
    trace = draw(st.floats(0.05, 1.0))
    return random_state(np.random.default_rng(seed), n, rank, trace)


@settings(max_examples=200, deadline=None)
@given(states())
def test_measures_agree_on_entanglement(rho):
    coherent = is_entangled(rho, 1e-10)
    assert (global_entanglement(rho) > 0) == coherent
    assert (witness(rho) > 0) == coherent


@settings(max_examples=200, deadline=None)
@given(states(), st.integers(0, 2**32 - 1))
def test_phase_unitary_invariance(rho, seed):
    phases = np.exp(1j * np.random.default_rng(seed).uniform(0, 2 * np.pi, rho.shape[0]))
    u = np.diag(phases)
    rotated = u @ rho @ u.conj().T
    assert abs(global_entanglement(rotated) - global_entanglement(rho)) <= 1e-12
    assert witness(rotated) == pytest.approx(witness(rho), abs=1e-12)


def test_diagonal_states_are_unentangled():
    rng = np.random.default_rng(5)
    for _ in range(200):
        rho = random_diagonal(rng, int(rng.integers(1, 8)))
        assert abs(global_entanglement(rho)) <= 1e-12
        assert witness(rho) == 0.0
