"""Drude-Lorentz (overdamped Brownian oscillator) environments.

Every site couples diagonally to its own, independent bath. The bath
correlation function is expanded as ``C(t) = sum_k c_k exp(-nu_k t)`` with
the Drude pole (k = 0) followed by ``n_matsubara`` Matsubara terms; the
remainder of the Matsubara series is kept as a Markovian rate
(:func:`terminator_rate`).
"""

import math
from dataclasses import dataclass

import numpy as np

from .units import (
    BOLTZMANN_CM1_PER_K,
    WAVENUMBER_TO_RAD_PER_FS,
    rate_to_wavenumber,
    thermal_energy,
)

FMO_REORGANIZATION_CM1 = 35.0
FMO_RELAXATION_TIME_FS = 100.0


@dataclass(frozen=True)
class BathSpec:
    """Drude-Lorentz bath parameters.

    Attributes
    ----------
    lam : float
        Reorganization energy in cm^-1.
    gamma : float
        Phonon relaxation rate in fs^-1.
    temperature : float
        Kelvin.
    n_matsubara : int
        Number of explicit Matsubara terms K.
    """

    lam: float
    gamma: float
    temperature: float
    n_matsubara: int = 0

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"reorganization energy must be >= 0, got {self.lam!r}")
        if not self.gamma > 0:
            raise ValueError(f"relaxation rate must be > 0, got {self.gamma!r}")
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature!r}")
        if int(self.n_matsubara) != self.n_matsubara or self.n_matsubara < 0:
            raise ValueError(f"n_matsubara must be a nonnegative integer, got {self.n_matsubara!r}")

    @property
    def gamma_cm1(self):
        return rate_to_wavenumber(self.gamma)

    @property
    def kT_cm1(self):
        return thermal_energy(self.temperature)

    @property
    def beta(self):
        """Inverse temperature in fs (hbar = 1, angular units)."""
        return 1.0 / (BOLTZMANN_CM1_PER_K * self.temperature * WAVENUMBER_TO_RAD_PER_FS)

    @property
    def lam_angular(self):
        return self.lam * WAVENUMBER_TO_RAD_PER_FS


def fmo_bath(temperature, n_matsubara=0):
    return BathSpec(FMO_REORGANIZATION_CM1, 1.0 / FMO_RELAXATION_TIME_FS,
                    temperature, n_matsubara)


@dataclass(frozen=True)
class CorrelationExpansion:
    """Coefficients ``c`` (fs^-2) and decay rates ``nu`` (fs^-1)."""

    c: np.ndarray
    nu: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.sum(self.c * np.exp(-np.multiply.outer(t, self.nu)), axis=-1)


def drude_spectral_density(omega, lam, gamma):
    """``J(w) = 2 lam gamma w / (w^2 + gamma^2)``; all arguments in one unit."""
    omega = np.asarray(omega, dtype=float)
    return 2.0 * lam * gamma * omega / (omega**2 + gamma**2)


def matsubara_frequencies(bath, count=None):
    """First ``count`` Matsubara frequencies (k = 1..count) in fs^-1."""
    count = bath.n_matsubara if count is None else count
    k = np.arange(1, count + 1, dtype=float)
    return 2.0 * math.pi * k / bath.beta


def correlation_coefficients(bath):
    """Drude pole plus ``bath.n_matsubara`` Matsubara terms of ``C(t)``."""
    lam, gam, beta = bath.lam_angular, bath.gamma, bath.beta
    nu_m = matsubara_frequencies(bath)
    if np.any(np.isclose(nu_m, gam, rtol=1e-9, atol=0.0)):
        raise ValueError("relaxation rate coincides with a Matsubara frequency")
    c0 = lam * gam * (1.0 / math.tan(0.5 * beta * gam) - 1j)
    cm = 4.0 * lam * gam * nu_m / (beta * (nu_m**2 - gam**2))
    c = np.concatenate(([c0], cm.astype(complex)))
    nu = np.concatenate(([gam], nu_m))
    return CorrelationExpansion(c, nu)


def terminator_rate(bath):
    """Residual Matsubara weight ``sum_{k>K} c_k / nu_k`` in fs^-1.

    Used as the coefficient of a ``-[V, [V, rho]]`` dissipator that stands in
    for the Matsubara terms not carried explicitly.
    """
    lam, gam, beta = bath.lam_angular, bath.gamma, bath.beta
    if lam == 0.0:
        return 0.0
    x = 0.5 * beta * gam
    # closed form of the full Matsubara sum: lam * (1/x - cot x)
    total = lam * (1.0 / x - 1.0 / math.tan(x))
    expl = correlation_coefficients(bath)
    return float(total - np.sum(expl.c[1:].real / expl.nu[1:]))


def bath_spectrum(omega_cm1, bath):
    """Thermal spectrum ``2 J(w) / (1 - exp(-beta w))`` in cm^-1.

    The value at ``w = 0`` is the analytic limit ``4 lam kT / gamma``.
    """
    w = np.asarray(omega_cm1, dtype=float)
    kT = bath.kT_cm1
    gam = bath.gamma_cm1
    jw = drude_spectral_density(w, bath.lam, gam)
    zero = w == 0.0
    safe = np.where(zero, 1.0, w)
    out = 2.0 * jw / -np.expm1(-safe / kT)
    return np.where(zero, 4.0 * bath.lam * kT / gam, out)
