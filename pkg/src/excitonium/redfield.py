"""Markovian Redfield dynamics in the exciton basis, full and secular.

For site couplings ``V_j = |j><j|`` and exciton basis ``{|a>}`` the
dissipator is

    D(rho) = -sum_j [A_j, L_j rho - rho L_j^dagger],
    A_j = <a|V_j|b>,   (L_j)_ab = (A_j)_ab * S(-w_ab) / 2,

with ``S(w) = 2 J(w) / (1 - exp(-beta w))`` the thermal bath spectrum and
``w_ab = E_a - E_b``. The imaginary (energy-shift) part of the one-sided
spectrum is not included. The secular variant keeps only tensor elements
that connect density-matrix elements oscillating at the same frequency.
"""

from dataclasses import dataclass, replace

import numpy as np

from .bath import BathSpec, bath_spectrum
from .entanglement import EIGENVALUE_SLACK
from .hamiltonian import ExcitonDecomposition, exciton_decomposition, validate_state
from .propagation import iter_integrate
from .trajectory import StateValidityError, Trajectory
from .units import BOLTZMANN_CM1_PER_K, WAVENUMBER_TO_RAD_PER_FS

SECULAR_TOLERANCE_CM1 = 1e-6
VARIANTS = ("full", "secular")


@dataclass(frozen=True)
class RedfieldTensor:
    """Generator acting on row-major vectorized exciton-basis matrices.

    ``tensor`` is in fs^-1 and includes the coherent ``-i w_ab`` part.
    ``secular_mask`` flags the elements the secular variant keeps.
    """

    basis: ExcitonDecomposition
    tensor: np.ndarray
    secular_mask: np.ndarray
    variant: str = "full"

    @property
    def n_sites(self):
        return self.basis.energies.size

    def apply(self, rho_exciton):
        n = self.n_sites
        return (self.tensor @ np.ravel(rho_exciton)).reshape(n, n)


def _frequency_gaps(energies):
    return energies[:, None] - energies[None, :]


def secular_mask(energies, tol=SECULAR_TOLERANCE_CM1):
    gaps = _frequency_gaps(energies).ravel()
    return np.abs(gaps[:, None] - gaps[None, :]) <= tol


def superoperator(fn, n):
    """Matrix of the linear map ``fn`` on row-major vectorized n x n matrices."""
    out = np.empty((n * n, n * n), dtype=complex)
    for col in range(n * n):
        basis = np.zeros(n * n, dtype=complex)
        basis[col] = 1.0
        out[:, col] = np.ravel(fn(basis.reshape(n, n)))
    return out


def build_redfield_tensor(h, bath, secular_tol=SECULAR_TOLERANCE_CM1):
    """Full Redfield generator for ``h`` (cm^-1) with independent site baths.

    ``bath`` is one :class:`BathSpec` or a sequence with one per site.
    """
    dec = exciton_decomposition(h)
    n = dec.energies.size
    baths = [bath] * n if isinstance(bath, BathSpec) else list(bath)
    if len(baths) != n:
        raise ValueError(f"expected {n} site baths, got {len(baths)}")
    gaps = _frequency_gaps(dec.energies)
    couplings = []
    for j, b in enumerate(baths):
        a_j = np.outer(dec.vectors[j], dec.vectors[j])
        rates = 0.5 * bath_spectrum(-gaps, b) * WAVENUMBER_TO_RAD_PER_FS
        couplings.append((a_j, a_j * rates))
    coherent = -1j * gaps * WAVENUMBER_TO_RAD_PER_FS

    def generator(rho):
        out = coherent * rho
        for a_j, l_j in couplings:
            x = l_j @ rho - rho @ l_j.conj().T
            out -= a_j @ x - x @ a_j
        return out

    tensor = superoperator(generator, n)
    return RedfieldTensor(dec, tensor, secular_mask(dec.energies, secular_tol))


def secularize(tensor):
    """Drop the non-secular elements; applying this twice changes nothing."""
    return replace(tensor, tensor=np.where(tensor.secular_mask, tensor.tensor, 0.0),
                   variant="secular")


def trapping_superoperator(basis, trapping):
    """``-(G/2){P, rho}`` in the exciton basis for the site trap projector ``P``."""
    n = basis.energies.size
    if trapping is None or trapping.rate == 0.0:
        return np.zeros((n * n, n * n), dtype=complex)
    v = basis.vectors[trapping.site - 1]
    proj = np.outer(v, v)
    eye = np.eye(n)
    return -0.5 * trapping.rate * (np.kron(proj, eye) + np.kron(eye, proj.T))


def generator_matrix(tensor, trapping=None, variant=None):
    variant = variant or tensor.variant
    if variant not in VARIANTS:
        raise ValueError(f"unknown Redfield variant {variant!r}")
    if variant == "secular" and tensor.variant != "secular":
        tensor = secularize(tensor)
    return tensor.tensor + trapping_superoperator(tensor.basis, trapping)


def propagate_redfield(tensor, trapping, rho0, t_grid, variant=None, opts=None, validate=True):
    """Propagate a site-basis ``rho0``; states are reported in the site basis."""
    validate_state(rho0).check(tol=EIGENVALUE_SLACK)
    variant = variant or tensor.variant
    gen = generator_matrix(tensor, trapping, variant)
    basis = tensor.basis
    n = basis.energies.size

    def rhs(t, y):
        return gen @ y

    y0 = np.ravel(basis.to_exciton(np.asarray(rho0, dtype=complex)))
    # full Redfield is not completely positive; its defects are flagged only
    traj = Trajectory(f"redfield-{variant}", enforce_positivity=variant == "secular")
    for t, y in iter_integrate(rhs, y0, t_grid, opts):
        try:
            traj.append(t, basis.to_site(y.reshape(n, n)), validate=validate)
        except StateValidityError as exc:
            traj.status = f"failed: {exc}"
            exc.trajectory = traj
            raise
    return traj


def gibbs_state(h, temperature, norm=1.0):
    """Thermal state of ``h`` (cm^-1) at ``temperature`` K with trace ``norm``."""
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature!r}")
    dec = exciton_decomposition(h)
    e = dec.energies - dec.energies.min()
    w = np.exp(-e / (BOLTZMANN_CM1_PER_K * temperature))
    w *= norm / w.sum()
    return ((dec.vectors * w) @ dec.vectors.T).astype(complex)
