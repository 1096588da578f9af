"""Unit conventions.

Energies are carried in wavenumbers (cm^-1), times in femtoseconds and
hbar = 1. Anything that enters an equation of motion is first converted to
angular frequency (rad/fs) with ``wavenumber_to_angular``.
"""

import math

import numpy as np

SPEED_OF_LIGHT_CM_PER_FS = 2.99792458e-5
WAVENUMBER_TO_RAD_PER_FS = 2.0 * math.pi * SPEED_OF_LIGHT_CM_PER_FS
BOLTZMANN_CM1_PER_K = 0.695035


def wavenumber_to_angular(e):
    """Convert an energy in cm^-1 to an angular frequency in rad/fs."""
    return np.multiply(e, WAVENUMBER_TO_RAD_PER_FS)


def angular_to_wavenumber(w):
    """Inverse of :func:`wavenumber_to_angular`."""
    return np.divide(w, WAVENUMBER_TO_RAD_PER_FS)


def thermal_energy(temperature):
    """Return k_B T in cm^-1 for a temperature in kelvin."""
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature!r}")
    return temperature * BOLTZMANN_CM1_PER_K


def rate_to_wavenumber(rate_per_fs):
    """Express a rate in fs^-1 as the equivalent energy in cm^-1."""
    return rate_per_fs / WAVENUMBER_TO_RAD_PER_FS
