import numpy as np
import pytest

from excitonium.hamiltonian import (
    InvalidStateError,
    build_fmo_hamiltonian,
    exciton_decomposition,
    load_hamiltonian,
    site_state,
    validate_state,
)

from helpers import random_hermitian


def test_fmo_matrix_entries():
    h = build_fmo_hamiltonian()
    assert h.shape == (7, 7)
    assert h[0, 1] == -87.7
    assert h[2, 2] == 0.0
    assert h[5, 5] == 420.0
    assert h[3, 4] == -70.7
    np.testing.assert_array_equal(h, h.T)
    np.testing.assert_array_equal(np.diag(h), [200, 320, 0, 110, 270, 420, 230])


def test_site_state():
    rho = site_state(1, 7)
    assert rho[0, 0] == 1.0
    assert np.count_nonzero(rho) == 1
    rho6 = site_state(6, 7)
    assert rho6[5, 5] == 1.0 and np.trace(rho6) == 1.0
    with pytest.raises(IndexError):
        site_state(8, 7)
    with pytest.raises(IndexError):
        site_state(0, 7)


def test_validate_state_defects():
    d = validate_state(site_state(1, 7))
    assert (d.hermiticity_defect, d.min_eigenvalue, d.trace) == (0.0, 0.0, 1.0)
    d.check()

    rho = np.zeros((2, 2))
    rho[0, 1] = 1.0
    assert validate_state(rho).hermiticity_defect == 1.0
    with pytest.raises(InvalidStateError):
        validate_state(rho).check()

    d = validate_state(np.diag([0.5, 0.6]))
    assert d.trace_excess == pytest.approx(0.1)
    with pytest.raises(InvalidStateError):
        d.check()

    with pytest.raises(InvalidStateError):
        validate_state(np.diag([1.2, -0.2])).check()
    with pytest.raises(ValueError):
        validate_state(np.zeros((2, 3)))


def test_subnormalized_state_is_valid():
    validate_state(np.diag([0.3, 0.2])).check()


def test_decomposition_trivial_cases():
    dec = exciton_decomposition(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(dec.energies, [1.0, 2.0])
    np.testing.assert_allclose(dec.vectors, np.eye(2))

    j = 40.0
    dec = exciton_decomposition([[0.0, j], [j, 0.0]])
    np.testing.assert_allclose(dec.energies, [-j, j])
    s = 1 / np.sqrt(2)
    # largest component made positive; ties resolve to the first entry
    np.testing.assert_allclose(np.abs(dec.vectors), s * np.ones((2, 2)))
    np.testing.assert_allclose(dec.vectors[:, 0] * np.sign(dec.vectors[0, 0]), [s, -s])
    np.testing.assert_allclose(dec.vectors[:, 1] * np.sign(dec.vectors[0, 1]), [s, s])


def test_fmo_decomposition_against_independent_eigensolver():
    import scipy.linalg

    h = build_fmo_hamiltonian()
    dec = exciton_decomposition(h)
    assert np.max(np.abs(dec.reconstruct() - h)) < 1e-10
    # general (non-symmetric) LAPACK driver as an independent oracle
    ref = np.sort(scipy.linalg.eigvals(h).real)
    np.testing.assert_allclose(dec.energies, ref, atol=1e-9)
    np.testing.assert_allclose(dec.vectors.T @ dec.vectors, np.eye(7), atol=1e-12)


def test_decomposition_properties_random():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        h = random_hermitian(rng, n)
        dec = exciton_decomposition(h)
        assert np.all(np.diff(dec.energies) >= 0)
        assert np.max(np.abs(dec.reconstruct() - h)) < 1e-10 * max(1.0, np.abs(h).max())
        np.testing.assert_allclose(dec.vectors.T @ dec.vectors, np.eye(n), atol=1e-12)
        pivot = np.argmax(np.abs(dec.vectors), axis=0)
        assert np.all(dec.vectors[pivot, np.arange(n)] > 0)
        rho = np.diag(rng.dirichlet(np.ones(n)))
        np.testing.assert_allclose(dec.to_site(dec.to_exciton(rho)), rho, atol=1e-13)


def test_decomposition_rejects_non_finite():
    with pytest.raises(np.linalg.LinAlgError):
        exciton_decomposition([[0.0, np.nan], [np.nan, 1.0]])


def test_load_hamiltonian(tmp_path):
    path = tmp_path / "dimer.txt"
    path.write_text("# dimer\n100 -20\n\n-20 0  # second row\n")
    np.testing.assert_array_equal(load_hamiltonian(path), [[100, -20], [-20, 0]])

    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n3 4\n")
    with pytest.raises(ValueError, match="symmetric"):
        load_hamiltonian(bad)
    bad.write_text("1 2 3\n2 1 0\n")
    with pytest.raises(ValueError, match="square"):
        load_hamiltonian(bad)
    bad.write_text("1 x\n")
    with pytest.raises(ValueError, match=":1:"):
        load_hamiltonian(bad)
