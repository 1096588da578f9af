"""Hierarchical equations of motion for Drude-Lorentz site baths.

Each site ``j`` couples through ``V_j = |j><j|`` to an independent bath whose
correlation function is ``sum_k c_k exp(-nu_k t)``. Every (site, term) pair
is one hierarchy mode. The auxiliary density operator (ADO) for multi-index
``n`` obeys

    d rho_n/dt = -i[H, rho_n] - (sum_m n_m nu_m) rho_n
                 - sum_m i [V_m, rho_{n+e_m}]
                 - sum_m i n_m (c_m V_m rho_{n-e_m} - c_m^* rho_{n-e_m} V_m)
                 - sum_j delta_j [V_j, [V_j, rho_n]]  - (G/2){P_trap, rho_n}

with ADOs deeper than the truncation depth set to zero. ``delta_j`` is the
Markovian remainder of the Matsubara terms not carried explicitly.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb

import numba
import numpy as np

from .bath import BathSpec, correlation_coefficients, terminator_rate
from .entanglement import EIGENVALUE_SLACK
from .hamiltonian import FMO_TRAP_SITE, validate_state
from .propagation import iter_integrate
from .trajectory import StateValidityError, Trajectory
from .units import WAVENUMBER_TO_RAD_PER_FS

DEFAULT_DEPTH = 4
DEFAULT_MAX_ADOS = 2_000_000
FMO_TRAP_TIME_FS = 4000.0


@dataclass(frozen=True)
class TrappingSpec:
    """Irreversible loss from one site (1-based) at ``rate`` fs^-1.

    The population of ``site`` decays at ``rate``; its coherences at half
    that rate.
    """

    site: int = FMO_TRAP_SITE
    rate: float = 1.0 / FMO_TRAP_TIME_FS

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError(f"trapping rate must be >= 0, got {self.rate!r}")
        if self.site < 1:
            raise ValueError(f"trapping site must be >= 1, got {self.site!r}")


NO_TRAPPING = TrappingSpec(rate=0.0)


def trapping_rhs_term(rho, trapping):
    """``-(G/2){P, rho}`` for the trap projector ``P``; works on stacks of matrices."""
    out = np.zeros_like(rho)
    if trapping is None or trapping.rate == 0.0:
        return out
    s = trapping.site - 1
    half = 0.5 * trapping.rate
    out[..., s, :] -= half * rho[..., s, :]
    out[..., :, s] -= half * rho[..., :, s]
    return out


def hierarchy_size(n_modes, depth):
    """Number of multi-indices over ``n_modes`` modes with total at most ``depth``."""
    return comb(n_modes + depth, depth)


class Hierarchy:
    """Dense enumeration of hierarchy multi-indices with neighbour tables.

    Indices are ordered by tier, then lexicographically (descending in the
    leading modes) within a tier. Ordinal 0 is the physical density matrix.

    Attributes
    ----------
    indices : ndarray, shape (n_ados, n_modes)
    up, down : ndarray, shape (n_ados, n_modes)
        Ordinal of ``n + e_m`` / ``n - e_m``, or -1 when out of range.
    """

    def __init__(self, n_sites, n_matsubara, depth, max_ados=DEFAULT_MAX_ADOS):
        if depth < 0:
            raise ValueError(f"depth must be >= 0, got {depth!r}")
        self.n_sites = n_sites
        self.n_terms = n_matsubara + 1
        self.n_modes = n_sites * self.n_terms
        self.depth = depth
        size = hierarchy_size(self.n_modes, depth)
        if size > max_ados:
            raise ValueError(
                f"hierarchy with {size} ADOs exceeds the limit of {max_ados}")
        self.indices = np.array(list(_enumerate(self.n_modes, depth)), dtype=np.int64)
        self.indices = self.indices.reshape(size, self.n_modes)
        self._rank = {tuple(row): i for i, row in enumerate(self.indices.tolist())}
        self.up, self.down = self._neighbours()

    def __len__(self):
        return self.indices.shape[0]

    def rank(self, index):
        return self._rank[tuple(index)]

    def mode(self, site, term):
        """Mode number of Matsubara term ``term`` on 0-based ``site``."""
        return site * self.n_terms + term

    def _neighbours(self):
        n, m = self.indices.shape
        up = np.full((n, m), -1, dtype=np.int64)
        down = np.full((n, m), -1, dtype=np.int64)
        rows = self.indices.tolist()
        tiers = self.indices.sum(axis=1)
        for a, row in enumerate(rows):
            for k in range(m):
                if tiers[a] < self.depth:
                    row[k] += 1
                    up[a, k] = self._rank[tuple(row)]
                    row[k] -= 1
                if row[k] > 0:
                    row[k] -= 1
                    down[a, k] = self._rank[tuple(row)]
                    row[k] += 1
        return up, down


def _enumerate(n_modes, depth):
    for tier in range(depth + 1):
        yield from _compositions(n_modes, tier)


def _compositions(n_modes, total):
    if n_modes == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(n_modes - 1, total - first):
            yield (first,) + rest


@numba.njit(nogil=True, cache=True)
def _rhs_block(rho, out, start, stop, hw, decay, up, down, occ, mode_site,
               mode_c, damp, trap_site, trap_half):
    n = rho.shape[1]
    n_modes = up.shape[1]
    for a in range(start, stop):
        r = rho[a]
        o = out[a]
        g = decay[a]
        for p in range(n):
            for q in range(n):
                s = 0j
                for l in range(n):
                    s += hw[p, l] * r[l, q] - r[p, l] * hw[l, q]
                o[p, q] = -1j * s - (g + damp[p, q]) * r[p, q]
        if trap_half > 0.0:
            for q in range(n):
                o[trap_site, q] -= trap_half * r[trap_site, q]
            for p in range(n):
                o[p, trap_site] -= trap_half * r[p, trap_site]
        for m in range(n_modes):
            j = mode_site[m]
            b = up[a, m]
            if b >= 0:
                rb = rho[b]
                for q in range(n):
                    o[j, q] -= 1j * rb[j, q]
                for p in range(n):
                    o[p, j] += 1j * rb[p, j]
            b = down[a, m]
            if b >= 0:
                rb = rho[b]
                cn = occ[a, m] * mode_c[m]
                cnc = cn.conjugate()
                for q in range(n):
                    o[j, q] -= 1j * cn * rb[j, q]
                for p in range(n):
                    o[p, j] += 1j * cnc * rb[p, j]


def worker_count(requested=None):
    """Worker threads for the right-hand side, capped by ``EXCITONIUM_THREADS``."""
    if requested is None:
        requested = os.cpu_count() or 1
    cap = os.environ.get("EXCITONIUM_THREADS")
    if cap:
        requested = min(requested, max(1, int(cap)))
    return max(1, int(requested))


def _per_site(bath, n_sites):
    if isinstance(bath, BathSpec):
        return [bath] * n_sites
    baths = list(bath)
    if len(baths) != n_sites:
        raise ValueError(f"expected {n_sites} site baths, got {len(baths)}")
    if len({b.n_matsubara for b in baths}) != 1:
        raise ValueError("all site baths must carry the same number of Matsubara terms")
    return baths


class HeomSolver:
    """Assembled hierarchy and a callable right-hand side.

    ``bath`` is one :class:`BathSpec` shared by all sites or a sequence with
    one entry per site. Right-hand-side evaluation splits the ADOs into
    contiguous blocks, one per worker; each ADO's derivative is computed by
    the same fixed sequence of operations, so results do not depend on the
    number of workers.
    """

    def __init__(self, h, bath, trapping=None, depth=DEFAULT_DEPTH,
                 terminator=True, workers=1, max_ados=DEFAULT_MAX_ADOS):
        self._pool = None
        h = np.asarray(h, dtype=float)
        n = h.shape[0]
        if h.shape != (n, n):
            raise ValueError(f"Hamiltonian must be square, got shape {h.shape}")
        baths = _per_site(bath, n)
        self.n_sites = n
        self.baths = baths
        self.trapping = trapping or NO_TRAPPING
        if self.trapping.rate > 0 and self.trapping.site > n:
            raise ValueError(f"trapping site {self.trapping.site} out of range 1..{n}")
        self.hierarchy = Hierarchy(n, baths[0].n_matsubara, depth, max_ados)
        self.terminator = terminator
        self.workers = worker_count(workers)

        hier = self.hierarchy
        expansions = [correlation_coefficients(b) for b in baths]
        self._mode_c = np.concatenate([e.c for e in expansions]).astype(np.complex128)
        mode_nu = np.concatenate([e.nu for e in expansions])
        self._mode_site = np.repeat(np.arange(n, dtype=np.int64), hier.n_terms)
        self._decay = (hier.indices @ mode_nu).astype(np.float64)
        delta = np.array([terminator_rate(b) if terminator else 0.0 for b in baths])
        # sum_j delta_j [V_j, [V_j, X]] has entries (delta_p + delta_q) X_pq, p != q
        damp = delta[:, None] + delta[None, :]
        np.fill_diagonal(damp, 0.0)
        self._damp = damp
        self._hw = h * WAVENUMBER_TO_RAD_PER_FS
        self._occ = hier.indices.astype(np.float64)
        self._trap_site = self.trapping.site - 1 if self.trapping.rate > 0 else 0
        self._trap_half = 0.5 * self.trapping.rate
        n_ados = len(hier)
        bounds = np.linspace(0, n_ados, min(self.workers, n_ados) + 1).astype(int)
        self._blocks = list(zip(bounds[:-1], bounds[1:]))
        self._pool = ThreadPoolExecutor(len(self._blocks)) if len(self._blocks) > 1 else None

    @property
    def shape(self):
        return (len(self.hierarchy), self.n_sites, self.n_sites)

    def initial_state(self, rho0):
        """Physical ADO set to ``rho0``; all auxiliaries zero (factorized start)."""
        rho0 = np.asarray(rho0)
        if rho0.shape != (self.n_sites, self.n_sites):
            raise ValueError(f"initial state has shape {rho0.shape}, expected "
                             f"{(self.n_sites, self.n_sites)}")
        state = np.zeros(self.shape, dtype=np.complex128)
        state[0] = rho0
        return state

    def _block(self, rho, out, start, stop):
        _rhs_block(rho, out, start, stop, self._hw, self._decay, self.hierarchy.up,
                   self.hierarchy.down, self._occ, self._mode_site, self._mode_c,
                   self._damp, self._trap_site, self._trap_half)

    def rhs(self, t, rho):
        if rho.shape != self.shape:
            raise ValueError(f"state has shape {rho.shape}, expected {self.shape}")
        rho = np.ascontiguousarray(rho, dtype=np.complex128)
        out = np.empty_like(rho)
        if self._pool is None:
            self._block(rho, out, 0, rho.shape[0])
        else:
            futures = [self._pool.submit(self._block, rho, out, a, b) for a, b in self._blocks]
            for f in futures:
                f.result()
        return out

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __del__(self):
        self.close()


def propagate_heom(h, bath, trapping, rho0, t_grid, depth=DEFAULT_DEPTH, opts=None,
                   terminator=True, workers=1, validate=True, max_ados=DEFAULT_MAX_ADOS):
    """Propagate ``rho0`` through the hierarchy and sample the physical ADO.

    Raises :class:`StateValidityError` (carrying the partial trajectory) if
    the physical state leaves the valid region.
    """
    validate_state(rho0).check(tol=EIGENVALUE_SLACK)
    solver = HeomSolver(h, bath, trapping, depth, terminator, workers, max_ados)
    traj = Trajectory("heom", metadata={"depth": depth, "ados": len(solver.hierarchy)})
    try:
        for t, state in iter_integrate(solver.rhs, solver.initial_state(rho0), t_grid, opts):
            try:
                traj.append(t, state[0], validate=validate)
            except StateValidityError as exc:
                traj.status = f"failed: {exc}"
                exc.trajectory = traj
                raise
    finally:
        solver.close()
    return traj


def convergence_scan(run, settings):
    """Compare trajectories produced by ``run(setting)`` for successive settings.

    Returns one row per consecutive pair with the sup-norm deviation of the
    global entanglement and of the site populations.
    """
    settings = list(settings)
    if len(settings) < 2:
        raise ValueError("convergence_scan needs at least two settings")
    trajs = [run(s) for s in settings]
    table = []
    for (s1, a), (s2, b) in zip(zip(settings, trajs), zip(settings[1:], trajs[1:])):
        if not np.array_equal(a.t(), b.t()):
            raise ValueError("trajectories are on different time grids")
        table.append({
            "from": s1,
            "to": s2,
            "max_dE": float(np.max(np.abs(a.E() - b.E()))),
            "max_dpop": float(np.max(np.abs(a.populations() - b.populations()))),
        })
    return table
