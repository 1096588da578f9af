"""Electronic Hamiltonians, single-excitation states and exciton bases."""

from pathlib import Path
from typing import NamedTuple

import numpy as np

# FMO monomer (C. tepidum), cm^-1, with the 12210 cm^-1 offset removed.
FMO_HAMILTONIAN = (
    (200.0, -87.7, 5.5, -5.9, 6.7, -13.7, -9.9),
    (-87.7, 320.0, 30.8, 8.2, 0.7, 11.8, 4.3),
    (5.5, 30.8, 0.0, -53.5, -2.2, -9.6, 6.0),
    (-5.9, 8.2, -53.5, 110.0, -70.7, -17.0, -63.3),
    (6.7, 0.7, -2.2, -70.7, 270.0, 81.1, -1.3),
    (-13.7, 11.8, -9.6, -17.0, 81.1, 420.0, 39.7),
    (-9.9, 4.3, 6.0, -63.3, -1.3, 39.7, 230.0),
)
FMO_OFFSET_CM1 = 12210.0
FMO_TRAP_SITE = 3


class InvalidStateError(ValueError):
    """A density matrix failed a validity check."""


class StateDiagnostics(NamedTuple):
    hermiticity_defect: float
    min_eigenvalue: float
    trace: float

    @property
    def trace_excess(self):
        """How far the trace exceeds one (zero when subnormalized)."""
        return max(self.trace - 1.0, 0.0)

    def check(self, tol=1e-9, herm_tol=None):
        """Raise :class:`InvalidStateError` if any defect exceeds ``tol``."""
        herm_tol = tol if herm_tol is None else herm_tol
        if self.hermiticity_defect > herm_tol:
            raise InvalidStateError(
                f"hermiticity defect {self.hermiticity_defect:.3e} > {herm_tol:.1e}")
        if self.min_eigenvalue < -tol:
            raise InvalidStateError(
                f"negative eigenvalue {self.min_eigenvalue:.3e} below -{tol:.1e}")
        if self.trace < -tol or self.trace_excess > tol:
            raise InvalidStateError(f"trace {self.trace!r} outside [0, 1]")
        return self


class ExcitonDecomposition(NamedTuple):
    """Eigenbasis of an electronic Hamiltonian.

    ``energies`` are ascending (cm^-1) and the columns of ``vectors`` are
    the excitons expressed in the site basis.
    """

    energies: np.ndarray
    vectors: np.ndarray

    def to_exciton(self, rho):
        return self.vectors.T @ rho @ self.vectors

    def to_site(self, rho):
        return self.vectors @ rho @ self.vectors.T

    def reconstruct(self):
        return (self.vectors * self.energies) @ self.vectors.T


def build_fmo_hamiltonian():
    """Return the 7-site FMO electronic Hamiltonian in cm^-1."""
    return np.array(FMO_HAMILTONIAN, dtype=float)


def load_hamiltonian(path):
    """Read a whitespace-separated square matrix (cm^-1) from a text file.

    Blank lines and lines starting with ``#`` are ignored.
    """
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no matrix rows found")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError(f"{path}: matrix is not square ({n} rows)")
    h = np.array(rows)
    if not np.all(np.isfinite(h)):
        raise ValueError(f"{path}: non-finite entries")
    if not np.array_equal(h, h.T):
        raise ValueError(f"{path}: matrix is not symmetric")
    return h


def site_state(site, n_sites):
    """Pure state with the excitation localized on ``site`` (1-based)."""
    if not 1 <= site <= n_sites:
        raise IndexError(f"site {site} out of range 1..{n_sites}")
    rho = np.zeros((n_sites, n_sites), dtype=complex)
    rho[site - 1, site - 1] = 1.0
    return rho


def validate_state(rho):
    """Return hermiticity defect, minimum eigenvalue and trace of ``rho``."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
    # eigenvalues of the Hermitian part; the defect above reports the rest
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return StateDiagnostics(herm, float(evals[0]), float(np.trace(rho).real))


def exciton_decomposition(h):
    """Diagonalize a real symmetric Hamiltonian with a fixed sign convention.

    Eigenvalues come out ascending (ties keep column order) and every
    eigenvector has its largest-magnitude component positive.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise np.linalg.LinAlgError("non-finite entries in Hamiltonian")
    energies, vectors = np.linalg.eigh(h)
    order = np.argsort(energies, kind="stable")
    energies, vectors = energies[order], vectors[:, order]
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return ExcitonDecomposition(energies, vectors * signs)
