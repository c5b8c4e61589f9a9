"""Dispersive ac Stark shift of the qubit from a driven metamaterial mode.

Sign convention: sigma_z = -1 in the ground state, so a positive chi raises
the 0-1 transition. The shift is chi * nbar with nbar the coherent-state
photon number of the driven mode. All frequencies are angular (rad/s).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, SingularityError

SINGULAR_FRACTION = 1e-6
TWO_PI_GHZ = 2 * np.pi * 1e9
TWO_PI_MHZ = 2 * np.pi * 1e6


@dataclass(frozen=True)
class StarkScenario:
    omega_q: float
    eta: float
    omega_i: float
    kappa_i: float
    g_i: float
    omega_d: float
    Omega: float = 0.0

    def __post_init__(self):
        if not self.kappa_i > 0:
            raise DomainError("mode linewidth kappa must be > 0")
        if self.eta == 0:
            raise DomainError("anharmonicity must be nonzero")

    @property
    def delta(self):
        return self.omega_q - self.omega_i

    def straddling(self):
        """True when the mode lies between the 0-1 and 1-2 transitions."""
        lo, hi = sorted((self.omega_q, self.omega_q + self.eta))
        return lo < self.omega_i < hi


def _check_pole(delta, pole, eta, name):
    if abs(delta - pole) < SINGULAR_FRACTION * abs(eta):
        raise SingularityError(f"chi is singular at {name} (delta = {delta:.6g} rad/s)", boundary=name)


def chi(s: StarkScenario, formula="reported"):
    """Shift per photon.

    ``formula="reported"``: g^2 eta / (delta eta - delta^2), poles at delta = 0 and
    delta = eta. ``formula="standard"``: g^2 eta / (delta (delta + eta)), the
    usual transmon dispersive shift with poles at delta = 0 and delta = -eta.
    """
    d, eta, g = s.delta, s.eta, s.g_i
    _check_pole(d, 0.0, eta, "delta=0")
    if formula == "reported":
        _check_pole(d, eta, eta, "delta=eta")
        return g**2 * eta / (d * eta - d**2)
    if formula == "standard":
        _check_pole(d, -eta, eta, "delta=-eta")
        return g**2 * eta / (d * (d + eta))
    raise ValueError(f"unknown chi formula {formula!r}")


def mean_photons(s: StarkScenario):
    """Coherent steady state: Omega^2 / ((omega_i - omega_d)^2 + kappa^2/4)."""
    return s.Omega**2 / ((s.omega_i - s.omega_d) ** 2 + s.kappa_i**2 / 4)


def stark_shift(s: StarkScenario, formula="reported"):
    return chi(s, formula) * mean_photons(s)


@dataclass(frozen=True)
class StarkMap:
    """Shifted qubit line per sweep column, plus the theory values behind it."""

    axis: str
    sweep: np.ndarray
    qubit_line: np.ndarray
    nbar: np.ndarray
    chi: np.ndarray

    @property
    def shift(self):
        return self.chi * self.nbar

    def spectroscopy(self, f_ghz, linewidth_ghz=0.002):
        """Synthetic spectroscopy image (column, frequency): a Lorentzian at each shifted line."""
        f = np.asarray(f_ghz, dtype=float)
        hw = linewidth_ghz / 2
        line = self.qubit_line[:, None] / TWO_PI_GHZ
        return hw**2 / ((f[None, :] - line) ** 2 + hw**2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sweep_value", "qubit_line_GHz", "nbar", "chi_MHz"])
        for x, q, n, c in zip(self.sweep, self.qubit_line, self.nbar, self.chi):
            w.writerow([f"{x:.9g}", f"{q / TWO_PI_GHZ:.12f}", f"{n:.9g}", f"{c / TWO_PI_MHZ:.9g}"])
        return buf.getvalue()


def stark_map(s: StarkScenario, axis, values, formula="reported", calibration=1.0) -> StarkMap:
    """Sweep drive power or drive frequency.

    ``axis="power"``: ``values`` are drive powers P and Omega^2 = calibration * P.
    ``axis="frequency"``: ``values`` are drive frequencies (rad/s) at the
    scenario's Omega.
    """
    values = np.asarray(values, dtype=float)
    c = chi(s, formula)
    if axis == "power":
        if np.any(values < 0):
            raise DomainError("drive power must be >= 0")
        nbar = np.array([mean_photons(replace(s, Omega=np.sqrt(calibration * p))) for p in values])
    elif axis == "frequency":
        nbar = np.array([mean_photons(replace(s, omega_d=wd)) for wd in values])
    else:
        raise ValueError("axis must be 'power' or 'frequency'")
    chis = np.full(values.shape, c)
    return StarkMap(axis=axis, sweep=values, qubit_line=s.omega_q + chis * nbar, nbar=nbar, chi=chis)


def fit_power_calibration(power, shift, s: StarkScenario, formula="reported"):
    """Single scale k in Omega^2 = k P from observed shifts (least squares through the origin)."""
    p = np.asarray(power, dtype=float)
    y = np.asarray(shift, dtype=float)
    per_unit = chi(s, formula) / ((s.omega_i - s.omega_d) ** 2 + s.kappa_i**2 / 4)
    x = per_unit * p
    den = float(x @ x)
    if den == 0:
        raise DomainError("calibration needs at least one nonzero power")
    return float(x @ y) / den
