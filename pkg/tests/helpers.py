"""Random single-excitation states shared by the test modules."""

import numpy as np


def random_state(rng, n, rank=None, trace=1.0):
    """Random density matrix on ``n`` sites with the given rank and trace."""
    rank = n if rank is None else rank
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ g.conj().T
    return trace * rho / np.trace(rho).real


def random_diagonal(rng, n, trace=1.0):
    p = rng.dirichlet(np.ones(n))
    return np.diag(trace * p).astype(complex)


def random_hermitian(rng, n, scale=100.0):
    a = rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.T)


def bell(n=2, i=0, j=1):
    psi = np.zeros(n, dtype=complex)
    psi[[i, j]] = 1.0 / np.sqrt(2.0)
    return np.outer(psi, psi.conj())
