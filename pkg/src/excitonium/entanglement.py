"""Entanglement of single-excitation states in the site basis.

Within the zero/one-excitation sector a state is entangled exactly when it
carries site-basis coherence. The pairwise measure is the concurrence
``2|rho_ij|``; the global measure is the relative entropy to the nearest
diagonal state of equal trace, which is the dephased state itself.
"""

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import InvalidStateError

DEFAULT_TOL = 1e-10
EIGENVALUE_SLACK = 1e-9


@dataclass(frozen=True)
class EntanglementReport:
    global_E: float
    witness_W: float
    pairwise: np.ndarray
    is_entangled: bool
    trace: float

    def as_row(self):
        """Flat record: trace, E, W, then C_ij for i<j in row-major order."""
        iu = np.triu_indices(self.pairwise.shape[0], 1)
        return [self.trace, self.global_E, self.witness_W, *self.pairwise[iu]]


def _check_pair(rho, i, j):
    n = rho.shape[0]
    if i == j:
        raise ValueError("concurrence needs two distinct sites")
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"sites ({i}, {j}) out of range 1..{n}")


def concurrence(rho, i, j):
    """Concurrence between sites ``i`` and ``j`` (1-based)."""
    rho = np.asarray(rho)
    _check_pair(rho, i, j)
    return 2.0 * abs(rho[i - 1, j - 1])


def concurrence_matrix(rho):
    """Symmetric matrix of all pairwise concurrences, zero diagonal."""
    c = 2.0 * np.abs(np.asarray(rho))
    np.fill_diagonal(c, 0.0)
    return 0.5 * (c + c.T)


def witness(rho):
    """Sum of the magnitudes of all site-basis coherences."""
    rho = np.asarray(rho)
    iu = np.triu_indices(rho.shape[0], 1)
    return float(np.sum(np.abs(rho[iu])))


def is_entangled(rho, tol=DEFAULT_TOL):
    rho = np.asarray(rho)
    iu = np.triu_indices(rho.shape[0], 1)
    if iu[0].size == 0:
        return False
    return bool(np.max(np.abs(rho[iu])) > tol)


def closest_separable(rho):
    """Nearest separable state in relative entropy: the dephased ``rho``."""
    rho = np.asarray(rho)
    return np.diag(np.diag(rho).real).astype(rho.dtype)


def _entropy_terms(p):
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def _clamped_eigenvalues(rho, slack):
    evals = np.linalg.eigvalsh(rho)
    if evals.size and evals[0] < -slack:
        raise InvalidStateError(f"eigenvalue {evals[0]:.3e} below -{slack:.1e}")
    return np.clip(evals, 0.0, None)


def von_neumann_entropy(rho, slack=EIGENVALUE_SLACK):
    """``-tr rho ln rho`` in nats; eigenvalues in [-slack, 0) count as zero."""
    return _entropy_terms(_clamped_eigenvalues(np.asarray(rho), slack))


def diagonal_entropy(rho, slack=EIGENVALUE_SLACK):
    p = np.diag(np.asarray(rho)).real
    if p.size and p.min() < -slack:
        raise InvalidStateError(f"negative population {p.min():.3e}")
    return _entropy_terms(np.clip(p, 0.0, None))


def global_entanglement(rho, slack=EIGENVALUE_SLACK):
    """Global entanglement ``-sum rho_ii ln rho_ii - S(rho)`` in nats.

    The state is used as given; no renormalization is applied.
    """
    return diagonal_entropy(rho, slack) - von_neumann_entropy(rho, slack)


def relative_entropy(rho, sigma, slack=EIGENVALUE_SLACK, support_tol=1e-12):
    """``tr(rho ln rho - rho ln sigma)``; ``inf`` if supp(rho) is not in supp(sigma)."""
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    first = -von_neumann_entropy(rho, slack)
    s_vals, s_vecs = np.linalg.eigh(sigma)
    if s_vals.size and s_vals[0] < -slack:
        raise InvalidStateError(f"sigma eigenvalue {s_vals[0]:.3e} below -{slack:.1e}")
    # weights of rho along each eigenvector of sigma
    weights = np.einsum("ia,ij,ja->a", s_vecs.conj(), rho, s_vecs).real
    null = s_vals <= support_tol
    if np.any(weights[null] > support_tol):
        return math.inf
    live = ~null
    return first - float(np.sum(weights[live] * np.log(s_vals[live])))


def entanglement_report(rho, tol=DEFAULT_TOL, slack=EIGENVALUE_SLACK):
    rho = np.asarray(rho)
    return EntanglementReport(
        global_E=global_entanglement(rho, slack),
        witness_W=witness(rho),
        pairwise=concurrence_matrix(rho),
        is_entangled=is_entangled(rho, tol),
        trace=float(np.trace(rho).real),
    )
