"""Two-port (ABCD) network algebra on a frequency grid.

Conventions: harmonic time dependence exp(+i w t), so an inductor has
impedance i w L and a capacitor 1/(i w C). A :class:`TwoPort` stores the
chain matrices of a network evaluated on every point of a frequency grid as
an array of shape ``(n, 2, 2)``; cascading is a batched matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericError
from .units import GHz, c as c_light

DENOMINATOR_FLOOR = 1e-300


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing, positive angular frequencies (rad/s)."""

    omega: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.omega, dtype=float))
        if w.ndim != 1 or w.size == 0:
            raise DomainError("frequency grid must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("frequency grid points must be finite and > 0")
        if w.size > 1 and np.any(np.diff(w) <= 0):
            raise DomainError("frequency grid must be strictly increasing")
        w.setflags(write=False)
        object.__setattr__(self, "omega", w)

    @classmethod
    def from_ghz(cls, fmin, fmax, points):
        if points == 1:
            return cls(2 * np.pi * np.array([fmin]) * GHz)
        return cls(2 * np.pi * np.linspace(fmin, fmax, int(points)) * GHz)

    @property
    def f_ghz(self):
        return self.omega / (2 * np.pi * GHz)

    def __len__(self):
        return self.omega.size


def as_omega(grid) -> np.ndarray:
    """Accept a FrequencyGrid, a scalar or an array of angular frequencies."""
    if isinstance(grid, FrequencyGrid):
        return grid.omega
    w = np.atleast_1d(np.asarray(grid, dtype=float))
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise DomainError("angular frequency must be finite and > 0")
    return w


@dataclass(frozen=True)
class TwoPort:
    """Chain (ABCD) matrices sampled on a grid, shape ``(n, 2, 2)``."""

    abcd: np.ndarray

    @property
    def A(self):
        return self.abcd[:, 0, 0]

    @property
    def B(self):
        return self.abcd[:, 0, 1]

    @property
    def C(self):
        return self.abcd[:, 1, 0]

    @property
    def D(self):
        return self.abcd[:, 1, 1]

    def __len__(self):
        return self.abcd.shape[0]

    def __matmul__(self, other: "TwoPort") -> "TwoPort":
        return TwoPort(np.matmul(self.abcd, other.abcd))

    def determinant(self):
        return self.A * self.D - self.B * self.C

    def reversed(self) -> "TwoPort":
        """The same network seen from port 2.

        Valid for reciprocal networks, whose determinant is exactly 1; computing
        AD - BC numerically would cancel catastrophically for long chains in a
        stop band.
        """
        m = np.empty_like(self.abcd)
        m[:, 0, 0] = self.D
        m[:, 0, 1] = self.B
        m[:, 1, 0] = self.C
        m[:, 1, 1] = self.A
        return TwoPort(m)

    def take(self, index) -> "TwoPort":
        return TwoPort(self.abcd[index])

    @classmethod
    def identity(cls, n):
        m = np.zeros((n, 2, 2), dtype=complex)
        m[:, 0, 0] = 1
        m[:, 1, 1] = 1
        return cls(m)


@dataclass(frozen=True)
class LumpedElement:
    """A series impedance or shunt admittance.

    ``value`` is either a constant or a callable ``value(omega) -> complex``.
    """

    kind: str
    value: complex | Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.kind not in ("series", "shunt"):
            raise DomainError(f"unknown element kind {self.kind!r}")

    def evaluate(self, omega):
        v = self.value(omega) if callable(self.value) else self.value
        return np.broadcast_to(np.asarray(v, dtype=complex), np.shape(omega))


def series(value) -> LumpedElement:
    return LumpedElement("series", value)


def shunt(value) -> LumpedElement:
    return LumpedElement("shunt", value)


def capacitor_impedance(capacitance, q=None):
    """Impedance of a capacitor, with dielectric loss if ``q`` is given."""
    c_eff = capacitance if q is None else capacitance * (1 - 1j / q)
    return lambda w: 1 / (1j * w * c_eff)


def inductor_impedance(inductance):
    return lambda w: 1j * w * inductance


@dataclass(frozen=True)
class TLineSegment:
    """Uniform transmission line of length ``length`` (m).

    The attenuation is either a fixed ``alpha`` (1/m) or, when ``alpha`` is
    None, derived from an internal quality factor as beta / (2 Q).
    """

    z0: float
    length: float
    eps_eff: float
    alpha: float | None = None
    q_internal: float | None = None

    def __post_init__(self):
        if not self.z0 > 0:
            raise DomainError("characteristic impedance must be > 0")
        if self.length < 0:
            raise DomainError("segment length must be >= 0")
        if not self.eps_eff > 0:
            raise DomainError("effective permittivity must be > 0")
        if self.alpha is not None and self.alpha < 0:
            raise DomainError("attenuation must be >= 0")

    def beta(self, omega):
        return omega * np.sqrt(self.eps_eff) / c_light

    def gamma(self, omega):
        b = self.beta(omega)
        if self.alpha is not None:
            a = self.alpha
        elif self.q_internal is not None:
            a = b / (2 * self.q_internal)
        else:
            a = 0.0
        return a + 1j * b


def _check_finite(z, what):
    if not np.all(np.isfinite(z)):
        raise DomainError(f"non-finite {what} value")


def element_abcd(el: LumpedElement, omega) -> TwoPort:
    w = as_omega(omega)
    v = el.evaluate(w)
    _check_finite(v, "element")
    m = TwoPort.identity(w.size).abcd
    if el.kind == "series":
        m[:, 0, 1] = v
    else:
        m[:, 1, 0] = v
    return TwoPort(m)


def tline_abcd(seg: TLineSegment, omega) -> TwoPort:
    w = as_omega(omega)
    gl = seg.gamma(w) * seg.length
    ch, sh = np.cosh(gl), np.sinh(gl)
    m = np.empty((w.size, 2, 2), dtype=complex)
    m[:, 0, 0] = ch
    m[:, 0, 1] = seg.z0 * sh
    m[:, 1, 0] = sh / seg.z0
    m[:, 1, 1] = ch
    return TwoPort(m)


def to_twoport(item, omega) -> TwoPort:
    if isinstance(item, TwoPort):
        return item
    if isinstance(item, LumpedElement):
        return element_abcd(item, omega)
    if isinstance(item, TLineSegment):
        return tline_abcd(item, omega)
    raise TypeError(f"cannot convert {type(item).__name__} to a two-port")


def cascade(ports: Sequence, omega=None) -> TwoPort:
    """Chain product of two-ports, input side first.

    Items may be :class:`TwoPort`, :class:`LumpedElement` or
    :class:`TLineSegment`; the latter two need ``omega``.
    """
    if len(ports) == 0:
        raise DomainError("cascade needs at least one two-port")
    w = None if omega is None else as_omega(omega)
    out = to_twoport(ports[0], w)
    for p in ports[1:]:
        out = out @ to_twoport(p, w)
    return out


def _guarded_divide(num, den, what):
    den = np.asarray(den)
    bad = np.abs(den) < DENOMINATOR_FLOOR
    if np.any(bad):
        idx = np.flatnonzero(np.atleast_1d(bad))
        raise NumericError(f"vanishing denominator in {what} at grid index {idx[:5].tolist()}")
    return num / den


def abcd_to_s21(port: TwoPort, r0=50.0, rl=None):
    """Forward transmission between real source and load impedances."""
    rl = r0 if rl is None else rl
    if not (r0 > 0 and rl > 0):
        raise DomainError("port impedances must be > 0")
    den = port.A * rl + port.B + port.C * r0 * rl + port.D * r0
    return _guarded_divide(2 * np.sqrt(r0 * rl), den, "S21")


def one_port_input_impedance(port: TwoPort, z_load):
    """Impedance seen at port 1 with port 2 terminated in ``z_load``."""
    num = port.A * z_load + port.B
    den = port.C * z_load + port.D
    return _guarded_divide(num, den, "input impedance")


def line_input_impedance(seg: TLineSegment, omega, z_load):
    """Closed-form lossy-line input impedance Z0 (ZL + Z0 t)/(Z0 + ZL t), t = tanh(gamma l)."""
    w = as_omega(omega)
    t = np.tanh(seg.gamma(w) * seg.length)
    return _guarded_divide(seg.z0 * (z_load + seg.z0 * t), seg.z0 + z_load * t, "line impedance")
