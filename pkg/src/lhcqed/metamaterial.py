"""Left-handed unit cell, closed-form LHTL impedance and hybrid resonator networks.

A unit cell has a series branch (stray inductance L_r in series with C_l) and
a shunt branch (L_l in parallel with stray capacitance C_r). Cells are
cascaded shunt-first from the input coupler, which is the ordering for which
the closed-form impedance :func:`lhtl_input_impedance` is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, NumericError
from .network import (
    FrequencyGrid,
    TLineSegment,
    TwoPort,
    abcd_to_s21,
    as_omega,
    one_port_input_impedance,
    tline_abcd,
)


@dataclass(frozen=True)
class LhtlCell:
    C_l: float
    L_l: float
    L_r: float = 0.0
    C_r: float = 0.0
    dx: float = 1e-4
    capacitor_q: float | None = None

    def __post_init__(self):
        if not (self.C_l > 0 and self.L_l > 0):
            raise DomainError("C_l and L_l must be > 0")
        if self.L_r < 0 or self.C_r < 0:
            raise DomainError("parasitics L_r, C_r must be >= 0")
        if not self.dx > 0:
            raise DomainError("cell length must be > 0")

    @property
    def impedance(self):
        """Nominal sqrt(L_l / C_l)."""
        return float(np.sqrt(self.L_l / self.C_l))

    @property
    def omega_ir(self):
        """Infrared cutoff 1 / (2 sqrt(L_l C_l)) of the ideal cell."""
        return 1.0 / (2.0 * np.sqrt(self.L_l * self.C_l))

    def _c_l(self):
        if self.capacitor_q is None:
            return self.C_l
        return self.C_l * (1 - 1j / self.capacitor_q)

    def series_impedance(self, omega):
        w = np.asarray(omega, dtype=float)
        return 1j * w * self.L_r + 1 / (1j * w * self._c_l())

    def shunt_admittance(self, omega):
        w = np.asarray(omega, dtype=float)
        return 1 / (1j * w * self.L_l) + 1j * w * self.C_r

    def cos_kdx(self, omega):
        """Right-hand side of the dispersion relation, 1 + Z Y / 2."""
        z = self.series_impedance(omega)
        y = self.shunt_admittance(omega)
        out = 1 + z * y / 2
        if self.capacitor_q is None:
            return out.real
        return out

    def twoport(self, omega) -> TwoPort:
        w = as_omega(omega)
        z = self.series_impedance(w)
        y = self.shunt_admittance(w)
        m = np.empty((w.size, 2, 2), dtype=complex)
        m[:, 0, 0] = 1
        m[:, 0, 1] = z
        m[:, 1, 0] = y
        m[:, 1, 1] = 1 + y * z
        return TwoPort(m)

    def scaled_to(self, impedance) -> "LhtlCell":
        """Impedance-scale every element so sqrt(L_l/C_l) equals ``impedance``.

        Inductances scale by r and capacitances by 1/r, so all resonances of the
        cell (and hence the dispersion relation) are unchanged.
        """
        r = impedance / self.impedance
        return replace(self, L_l=self.L_l * r, L_r=self.L_r * r, C_l=self.C_l / r, C_r=self.C_r / r)


@dataclass(frozen=True)
class DispersionResult:
    omega: np.ndarray
    kdx: np.ndarray
    passband: np.ndarray
    z0l: np.ndarray

    @property
    def f_ghz(self):
        return self.omega / (2 * np.pi * 1e9)


def _wavenumber(cell: LhtlCell, w):
    arg = cell.cos_kdx(w)
    k = np.arccos(np.asarray(arg, dtype=complex))
    if np.isrealobj(arg):
        # lossless: pick the branch that decays toward increasing cell index
        k = np.where(k.imag < 0, np.conj(k), k)
    return k, arg


def dispersion(cell: LhtlCell, grid) -> DispersionResult:
    """Complex k dx from cos(k dx) = 1 - (w L_r - 1/w C_l)(w C_r - 1/w L_l)/2.

    For a lossless cell Re(k dx) lies in [0, pi] and Im(k dx) >= 0 so that
    exp(i k N dx) decays into the line in the gap.
    """
    w = as_omega(grid)
    k, arg = _wavenumber(cell, w)
    passband = np.abs(np.real(arg)) <= 1.0
    s = np.sin(k / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        z0l = cell.series_impedance(w) / (2j * s)
    return DispersionResult(omega=w, kdx=k, passband=passband, z0l=z0l)


def lhtl_input_impedance(cell: LhtlCell, n_cells: int, z_source, grid):
    """Impedance looking into the far end of an N-cell LHTL driven from ``z_source``.

    Closed form in terms of the Bloch wavenumber k, the characteristic
    impedance Z_0l = Z_series / (2 i sin(k dx/2)) and the source-side
    reflection coefficient Gamma. ``z_source`` may be a scalar, an array on
    the grid, or a callable of omega.
    """
    if n_cells < 1:
        raise DomainError("need at least one cell")
    w = as_omega(grid)
    zs = z_source(w) if callable(z_source) else np.broadcast_to(np.asarray(z_source, dtype=complex), w.shape)
    k, _ = _wavenumber(cell, w)
    s = np.sin(k / 2)
    if np.any(np.abs(s) < 1e-300):
        raise NumericError("sin(k dx / 2) underflow in LHTL characteristic impedance")
    z0l = cell.series_impedance(w) / (2j * s)
    eh = np.exp(1j * k / 2)
    gamma = (zs / eh - z0l) / (zs * eh + z0l)
    n = n_cells
    # Same ratio as  (e^{ikN} + G e^{-ikN}) / (e^{ik(N-1/2)} - G e^{-ik(N-1/2)}),
    # rescaled by whichever exponential is bounded so nothing overflows.
    up = k.imag >= 0
    ku, kd = np.where(up, k, 0), np.where(up, 0, k)
    num = np.where(up, np.exp(2j * ku * n) + gamma, 1 + gamma * np.exp(-2j * kd * n))
    den = np.where(
        up,
        np.exp(1j * ku * (2 * n - 0.5)) - gamma * np.exp(1j * ku / 2),
        np.exp(-1j * kd / 2) - gamma * np.exp(-1j * kd * (2 * n - 0.5)),
    )
    if np.any(np.abs(den) < 1e-300):
        raise NumericError("vanishing denominator in LHTL impedance")
    return z0l * num / den


@dataclass(frozen=True)
class LumpedRhtl:
    """Right-handed ladder of ``n_cells`` (series L, then shunt C)."""

    n_cells: int
    L: float
    C: float

    def __post_init__(self):
        if self.n_cells < 1 or not (self.L > 0 and self.C > 0):
            raise DomainError("lumped RHTL needs n_cells >= 1 and positive L, C")

    @property
    def impedance(self):
        return float(np.sqrt(self.L / self.C))

    def twoport(self, omega, n_cells) -> TwoPort:
        w = as_omega(omega)
        m = np.empty((w.size, 2, 2), dtype=complex)
        z = 1j * w * self.L
        y = 1j * w * self.C
        m[:, 0, 0] = 1 + z * y
        m[:, 0, 1] = z
        m[:, 1, 0] = y
        m[:, 1, 1] = 1
        if n_cells == 0:
            return TwoPort.identity(w.size)
        return TwoPort(np.linalg.matrix_power(m, n_cells))


@dataclass(frozen=True)
class HybridResonatorSpec:
    """LHTL followed by an optional RHTL, between two coupling capacitors.

    ``tap_from_output`` locates the qubit probe node: metres from the output
    coupler for a distributed RHTL, or a cell count for a lumped one.
    """

    n_cells: int
    cell: LhtlCell
    c_in: float
    c_out: float
    rhtl: TLineSegment | LumpedRhtl | None = None
    tap_from_output: float = 0.0
    r0: float = 50.0

    def __post_init__(self):
        if self.n_cells < 1:
            raise DomainError("need at least one LHTL cell")
        if not (self.c_in > 0 and self.c_out > 0 and self.r0 > 0):
            raise DomainError("coupling capacitances and R0 must be > 0")
        if isinstance(self.rhtl, TLineSegment):
            if not 0 <= self.tap_from_output <= self.rhtl.length:
                raise DomainError("tap position outside the RHTL")
        elif isinstance(self.rhtl, LumpedRhtl):
            if not 0 <= self.tap_from_output <= self.rhtl.n_cells or int(self.tap_from_output) != self.tap_from_output:
                raise DomainError("tap cell index outside the RHTL")
        elif self.rhtl is None and self.tap_from_output != 0:
            raise DomainError("an LHTL-only resonator has its probe at the output end")


@dataclass(frozen=True)
class HybridNetwork:
    """The resonator split at the qubit probe node.

    ``left`` runs from the input port to the probe node, ``right`` from the
    probe node to the output port; both exclude the source/load resistors.
    """

    omega: np.ndarray
    left: TwoPort
    right: TwoPort
    r0: float
    full: TwoPort = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "full", self.left @ self.right)

    def with_tap_admittance(self, y_tap) -> TwoPort:
        """Network with a shunt admittance ``y_tap`` (array on the grid) at the probe."""
        y = np.broadcast_to(np.asarray(y_tap, dtype=complex), self.omega.shape)
        m = np.matmul(self.left.abcd[:, :, 1:2], y[:, None, None] * self.right.abcd[:, 0:1, :])
        return TwoPort(self.full.abcd + m)

    def s21(self, y_tap=None):
        port = self.full if y_tap is None else self.with_tap_admittance(y_tap)
        return abcd_to_s21(port, self.r0)

    def tap_impedance(self):
        """Impedance seen from the probe node, both ports terminated in R0."""
        z_left = one_port_input_impedance(self.left.reversed(), self.r0)
        z_right = one_port_input_impedance(self.right, self.r0)
        return 1 / (1 / z_left + 1 / z_right)

    def restrict(self, index) -> "HybridNetwork":
        return HybridNetwork(self.omega[index], self.left.take(index), self.right.take(index), self.r0)


def _series_cap(c, w):
    m = TwoPort.identity(w.size).abcd
    m[:, 0, 1] = 1 / (1j * w * c)
    return TwoPort(m)


def build_hybrid_network(spec: HybridResonatorSpec, grid) -> HybridNetwork:
    """Input coupler, N LHTL cells, RHTL, output coupler; split at the probe node."""
    w = as_omega(grid)
    lhtl = TwoPort(np.linalg.matrix_power(spec.cell.twoport(w).abcd, spec.n_cells))
    left = _series_cap(spec.c_in, w) @ lhtl
    rhtl = spec.rhtl
    if isinstance(rhtl, TLineSegment):
        left = left @ tline_abcd(replace(rhtl, length=rhtl.length - spec.tap_from_output), w)
        right = tline_abcd(replace(rhtl, length=spec.tap_from_output), w)
    elif isinstance(rhtl, LumpedRhtl):
        tap = int(spec.tap_from_output)
        left = left @ rhtl.twoport(w, rhtl.n_cells - tap)
        right = rhtl.twoport(w, tap)
    else:
        right = TwoPort.identity(w.size)
    right = right @ _series_cap(spec.c_out, w)
    return HybridNetwork(w, left, right, spec.r0)


@dataclass(frozen=True)
class SpectrumTrace:
    omega: np.ndarray
    s21: np.ndarray

    def __len__(self):
        return self.omega.size

    @property
    def f_ghz(self):
        return self.omega / (2 * np.pi * 1e9)

    @property
    def magnitude(self):
        return np.abs(self.s21)

    @property
    def db(self):
        with np.errstate(divide="ignore"):
            return 20 * np.log10(np.abs(self.s21))


def spectrum(spec: HybridResonatorSpec, grid) -> SpectrumTrace:
    """S21 between the two metamaterial ports (no qubit attached)."""
    w = as_omega(grid)
    net = build_hybrid_network(spec, w)
    return SpectrumTrace(omega=w, s21=net.s21())


def lhtl_only(cell: LhtlCell, n_cells, c_in, c_out, r0=50.0) -> HybridResonatorSpec:
    return HybridResonatorSpec(n_cells=n_cells, cell=cell, c_in=c_in, c_out=c_out, rhtl=None, r0=r0)


__all__ = [
    "DispersionResult",
    "FrequencyGrid",
    "HybridNetwork",
    "HybridResonatorSpec",
    "LhtlCell",
    "LumpedRhtl",
    "SpectrumTrace",
    "build_hybrid_network",
    "dispersion",
    "lhtl_input_impedance",
    "lhtl_only",
    "spectrum",
]
