"""Time integration of matrix-valued linear ODEs.

States are sampled by stepping exactly onto each requested time; there is
no interpolation between steps because the entanglement measures are
nonlinear in the state.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import RK45

from .hamiltonian import exciton_decomposition
from .units import WAVENUMBER_TO_RAD_PER_FS

METHODS = ("rk4", "adaptive45")


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntegratorOptions:
    method: str = "rk4"
    dt: float = 1.0
    rtol: float = 1e-8
    atol: float = 1e-10
    dt_min: float = 1e-6
    dt_max: float = 10.0
    record_stride: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown integrator {self.method!r}; expected one of {METHODS}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not 0 < self.dt_min <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_max")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be a positive integer, got {self.record_stride!r}")


def _rk4_interval(rhs, t0, t1, y, dt):
    n = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    h = (t1 - t0) / n
    for i in range(n):
        t = t0 + i * h
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1)
        k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _adaptive_interval(rhs, t0, t1, y, opts):
    shape = y.shape

    def flat(t, v):
        return np.ravel(rhs(t, v.reshape(shape)))

    solver = RK45(flat, t0, np.ravel(y), t1, rtol=opts.rtol, atol=opts.atol,
                  max_step=opts.dt_max, first_step=min(opts.dt, t1 - t0))
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed" or (solver.status == "running" and solver.step_size < opts.dt_min):
            raise IntegrationError(
                f"adaptive step fell below dt_min={opts.dt_min} near t={solver.t:.6g} fs"
                + (f" ({msg})" if msg else ""))
    return solver.y.reshape(shape)


def iter_integrate(rhs, y0, t_grid, opts=None):
    """Yield ``(t, y)`` at each grid time, starting with ``(t_grid[0], y0)``."""
    opts = opts or IntegratorOptions()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a nonempty 1-D array")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly ascending")
    y = np.array(y0, dtype=complex)
    yield float(t_grid[0]), y
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        if opts.method == "rk4":
            y = _rk4_interval(rhs, float(t0), float(t1), y, opts.dt)
        else:
            y = _adaptive_interval(rhs, float(t0), float(t1), y, opts)
        yield float(t1), y


def integrate(rhs, y0, t_grid, opts=None):
    """Integrate ``dy/dt = rhs(t, y)`` and return states stacked on axis 0."""
    return np.stack([y for _, y in iter_integrate(rhs, y0, t_grid, opts)])


def unitary_oracle(h, rho0, t):
    """``exp(-iHt) rho0 exp(iHt)`` with ``h`` in cm^-1 and ``t`` in fs."""
    dec = exciton_decomposition(h)
    phase = np.exp(-1j * dec.energies * WAVENUMBER_TO_RAD_PER_FS * t)
    u = (dec.vectors * phase) @ dec.vectors.T
    return u @ np.asarray(rho0) @ u.conj().T


def commutator_rhs(h):
    """Right-hand side of the closed-system von Neumann equation."""
    hw = np.asarray(h, dtype=float) * WAVENUMBER_TO_RAD_PER_FS

    def rhs(t, rho):
        return -1j * (hw @ rho - rho @ hw)

    return rhs
