"""Physical constants and unit conversions.

Internally everything is SI (rad/s, H, F, Ohm, m). Energies in the
Hamiltonian module are frequencies in GHz (E/h).
"""

import numpy as np
from scipy import constants as _c

h = _c.h
hbar = _c.hbar
e = _c.e
c = _c.c
phi0 = _c.h / (2 * _c.e)

GHz = 1e9
MHz = 1e6
nH = 1e-9
fF = 1e-15
mm = 1e-3
um = 1e-6
us = 1e-6


def omega_from_ghz(f_ghz):
    return 2 * np.pi * np.asarray(f_ghz, dtype=float) * GHz


def ghz_from_omega(omega):
    return np.asarray(omega, dtype=float) / (2 * np.pi * GHz)


def charging_energy_ghz(c_sigma):
    """E_C/h in GHz for a total island capacitance ``c_sigma`` (F)."""
    return e**2 / (2 * c_sigma) / h / GHz


def inductance_from_ej(ej_ghz):
    """Josephson inductance (Phi0/2pi)^2 / E_J for E_J/h given in GHz."""
    ej = np.asarray(ej_ghz, dtype=float) * GHz * h
    return (phi0 / (2 * np.pi)) ** 2 / ej
