"""Qubit environment admittance and multimode Purcell-limited T1.

The qubit island sees two branches: the readout resonator through C_QR and
the hybrid metamaterial through C_QM. Each is a coupling capacitor in series
with two transmission-line stubs in parallel, terminated by coupling
capacitors to R0 (or, on the LHTL side, by the closed-form LHTL impedance).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.signal import argrelmin

from .errors import DomainError
from .metamaterial import LhtlCell, lhtl_input_impedance
from .network import TLineSegment, as_omega, line_input_impedance
from .units import GHz, fF, mm, us

T1_REFERENCE = 13e-6
F_REFERENCE = 4.5e9
POSITIVITY_TOLERANCE = 1e-12


def calibrate_floor(t1=T1_REFERENCE, f=F_REFERENCE):
    """Constant A such that A / omega equals ``t1`` at frequency ``f`` (Hz)."""
    return t1 * 2 * np.pi * f


@dataclass(frozen=True)
class ReadoutBranch:
    C_QR: float
    l_A: float
    l_B: float
    C_in: float
    C_out: float
    z0: float = 50.0
    r0: float = 50.0


@dataclass(frozen=True)
class MetamaterialBranch:
    C_QM: float
    cell: LhtlCell
    n_cells: int
    C_in: float
    C_out: float
    l_out: float = 0.9 * mm
    l_lhtl_side: float = 4.0 * mm
    z0: float = 50.0
    r0: float = 50.0


@dataclass(frozen=True)
class EnvironmentSpec:
    readout: ReadoutBranch
    metamaterial: MetamaterialBranch
    eps_eff: float
    alpha: float | None = None

    def __post_init__(self):
        r, m = self.readout, self.metamaterial
        lengths = (r.l_A, r.l_B, m.l_out, m.l_lhtl_side)
        caps = (r.C_QR, r.C_in, r.C_out, m.C_QM, m.C_in, m.C_out)
        if min(lengths) <= 0:
            raise DomainError("all segment lengths must be > 0")
        if min(caps) <= 0:
            raise DomainError("all capacitances must be > 0")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 1e-5 * np.pi / (2 * r.l_A))

    def segment(self, length, z0=50.0):
        return TLineSegment(z0=z0, length=length, eps_eff=self.eps_eff, alpha=self.alpha)

    @classmethod
    def from_device(cls, dev):
        """Environment of the qubit in a parsed device description."""
        q, r, m = dev.qubit, dev.readout, dev.metamaterial
        readout = ReadoutBranch(
            C_QR=q.C_QR_fF * fF,
            l_A=r.l_A_mm * mm,
            l_B=r.l_B_mm * mm,
            C_in=r.C_cR_in_fF * fF,
            C_out=r.C_cR_out_fF * fF,
            z0=r.Z0_ohm,
            r0=dev.line.R0_ohm,
        )
        meta = MetamaterialBranch(
            C_QM=q.C_QM_fF * fF,
            cell=dev.cell(lossy=False),
            n_cells=m.N_cells,
            C_in=m.C_cM_in_fF * fF,
            C_out=m.C_cM_out_fF * fF,
            l_out=m.tap_from_output_mm * mm,
            l_lhtl_side=(m.rhtl_length_mm - m.tap_from_output_mm) * mm,
            z0=m.rhtl_Z0_ohm,
            r0=dev.line.R0_ohm,
        )
        return cls(readout=readout, metamaterial=meta, eps_eff=dev.eps_eff)


def _cap(c, w):
    return 1 / (1j * w * c)


def _parallel(a, b):
    return a * b / (a + b)


def readout_stub_impedance(env: EnvironmentSpec, omega):
    """Readout resonator seen from the qubit side of C_QR (both stubs in parallel)."""
    w = as_omega(omega)
    r = env.readout
    za = line_input_impedance(env.segment(r.l_A, r.z0), w, _cap(r.C_in, w) + r.r0)
    zb = line_input_impedance(env.segment(r.l_B, r.z0), w, _cap(r.C_out, w) + r.r0)
    return _parallel(za, zb)


def readout_impedance(env: EnvironmentSpec, omega):
    """Z_R: C_QR in series with the two readout stubs."""
    w = as_omega(omega)
    return _cap(env.readout.C_QR, w) + readout_stub_impedance(env, w)


def metamaterial_impedance(env: EnvironmentSpec, omega):
    """Z_M: C_QM in series with the output-side stub parallel to the line + LHTL branch."""
    w = as_omega(omega)
    m = env.metamaterial
    z_a = line_input_impedance(env.segment(m.l_out, m.z0), w, _cap(m.C_out, w) + m.r0)
    z_lhtl = lhtl_input_impedance(m.cell, m.n_cells, lambda x: _cap(m.C_in, x) + m.r0, w)
    z_b = line_input_impedance(env.segment(m.l_lhtl_side, m.z0), w, z_lhtl)
    return _cap(m.C_QM, w) + _parallel(z_a, z_b)


def environment_admittance(env: EnvironmentSpec, omega):
    w = as_omega(omega)
    return 1 / readout_impedance(env, w) + 1 / metamaterial_impedance(env, w)


@dataclass(frozen=True)
class T1Curve:
    """T1 (s) on a frequency grid; ``flag`` marks points with Re Y <= 0."""

    omega: np.ndarray
    t1_total: np.ndarray
    t1_purcell: np.ndarray
    t1_floor: np.ndarray
    flag: np.ndarray
    A: float

    @property
    def f_ghz(self):
        return self.omega / (2 * np.pi * GHz)

    def plot_total(self):
        """T1_total with flagged points replaced by linear interpolation of good neighbours."""
        good = ~self.flag
        if good.all() or not good.any():
            return self.t1_total.copy()
        return np.interp(self.omega, self.omega[good], self.t1_total[good])

    def dips(self, order=20, below=None):
        """Indices of local minima of T1_purcell among unflagged points."""
        t = np.where(self.flag, np.inf, self.t1_purcell)
        idx = argrelmin(t, order=order)[0]
        if below is not None:
            idx = idx[t[idx] < below]
        return idx

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["f_GHz", "T1_us_total", "T1_us_purcell", "T1_us_floor", "flag"])
        for i in range(self.omega.size):
            w.writerow(
                [
                    f"{self.f_ghz[i]:.9f}",
                    f"{self.t1_total[i] / us:.9g}",
                    f"{self.t1_purcell[i] / us:.9g}",
                    f"{self.t1_floor[i] / us:.9g}",
                    int(self.flag[i]),
                ]
            )
        return buf.getvalue()


def t1_from_admittance(y, omega, c_qubit, A):
    """Combine (C_Q + 2 C_J)/Re Y with the A/omega floor; Re Y <= 0 is flagged as no Purcell loss."""
    w = as_omega(omega)
    if not (c_qubit > 0 and A > 0):
        raise DomainError("qubit capacitance and A must be > 0")
    re = np.real(y)
    flag = re <= 0
    with np.errstate(divide="ignore"):
        t1p = np.where(flag, np.inf, c_qubit / np.where(flag, 1.0, re))
    floor = A / w
    total = 1 / (1 / t1p + 1 / floor)
    return T1Curve(omega=w, t1_total=total, t1_purcell=t1p, t1_floor=floor, flag=flag, A=A)


def t1_curve(env: EnvironmentSpec, c_q, c_j, grid, A=None) -> T1Curve:
    """T1(omega) for qubit capacitances ``c_q`` and ``c_j`` (F)."""
    if not (c_q > 0 and c_j > 0):
        raise DomainError("C_Q and C_J must be > 0")
    w = as_omega(grid)
    A = calibrate_floor() if A is None else A
    return t1_from_admittance(environment_admittance(env, w), w, c_q + 2 * c_j, A)
