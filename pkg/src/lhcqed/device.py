"""Device descriptions: JSON files with explicit unit suffixes in field names.

A description has ``metamaterial``, ``qubit``, ``readout`` and ``line``
sections, optional ``sweep`` defaults and an optional ``design`` section of
overrides for a modified (hypothetical) device. :func:`parse_device` reports
every problem it finds at once, each with its field path.
"""

from __future__ import annotations

import json
from dataclasses import MISSING, asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .metamaterial import HybridResonatorSpec, LhtlCell, LumpedRhtl
from .network import TLineSegment
from .units import GHz, c, charging_energy_ghz, fF, mm, nH, um

BUNDLED = ("paper-device", "table2-device")


@dataclass(frozen=True)
class MetamaterialParams:
    N_cells: int
    L_l_nH: float
    C_l_fF: float
    L_r_nH: float
    C_r_fF: float
    C_cM_in_fF: float
    C_cM_out_fF: float
    rhtl_length_mm: float = 4.9
    tap_from_output_mm: float = 0.9
    rhtl_Z0_ohm: float = 50.0
    cell_length_um: float = 100.0
    capacitor_Q: float = 1e5


@dataclass(frozen=True)
class QubitParams:
    f01_max_GHz: float
    E_C_GHz: float
    E_J0_GHz: float
    C_Q_fF: float
    C_J_fF: float
    C_QR_fF: float
    C_QM_fF: float
    g_R_MHz: float = 65.0


@dataclass(frozen=True)
class ReadoutParams:
    f_R_GHz: float
    Q_total: float
    C_cR_in_fF: float
    C_cR_out_fF: float
    l_A_mm: float
    l_B_mm: float
    Z0_ohm: float = 50.0


@dataclass(frozen=True)
class LineParams:
    R0_ohm: float = 50.0
    eps_eff: float | None = None
    internal_Q: float = 1e5


@dataclass(frozen=True)
class SweepParams:
    fmin_GHz: float = 4.0
    fmax_GHz: float = 10.0
    points: int = 20001
    flux_points: int = 201
    prominence: float = 1e-3


@dataclass(frozen=True)
class DesignParams:
    """Overrides for a modified device with a lumped right-handed section."""

    N_cells: int | None = None
    Z_M_ohm: float | None = None
    N_r: int | None = None
    L_RH_nH: float | None = None
    C_RH_fF: float | None = None
    C_QM_fF: float | None = None
    C_Q_fF: float | None = None
    tap_from_output_cells: int = 0
    window_GHz: tuple[float, float] = (7.8, 8.4)


@dataclass(frozen=True)
class DeviceDescription:
    name: str
    metamaterial: MetamaterialParams
    qubit: QubitParams
    readout: ReadoutParams
    line: LineParams = field(default_factory=LineParams)
    sweep: SweepParams = field(default_factory=SweepParams)
    design: DesignParams | None = None

    # -- derived quantities -------------------------------------------------
    @property
    def eps_eff(self):
        """Effective permittivity; by default inferred from the readout fundamental."""
        if self.line.eps_eff is not None:
            return self.line.eps_eff
        length = (self.readout.l_A_mm + self.readout.l_B_mm) * mm
        return (c / (2 * length * self.readout.f_R_GHz * GHz)) ** 2

    @property
    def c_sigma(self):
        q = self.qubit
        return (q.C_Q_fF + 2 * q.C_J_fF + q.C_QR_fF + q.C_QM_fF) * fF

    def cell(self, lossy=True) -> LhtlCell:
        m = self.metamaterial
        return LhtlCell(
            C_l=m.C_l_fF * fF,
            L_l=m.L_l_nH * nH,
            L_r=m.L_r_nH * nH,
            C_r=m.C_r_fF * fF,
            dx=m.cell_length_um * um,
            capacitor_q=m.capacitor_Q if lossy else None,
        )

    def rhtl_segment(self, length_mm=None) -> TLineSegment:
        m = self.metamaterial
        return TLineSegment(
            z0=m.rhtl_Z0_ohm,
            length=(m.rhtl_length_mm if length_mm is None else length_mm) * mm,
            eps_eff=self.eps_eff,
            q_internal=self.line.internal_Q,
        )

    def resonator_spec(self, lossy=True) -> HybridResonatorSpec:
        m = self.metamaterial
        return HybridResonatorSpec(
            n_cells=m.N_cells,
            cell=self.cell(lossy),
            c_in=m.C_cM_in_fF * fF,
            c_out=m.C_cM_out_fF * fF,
            rhtl=self.rhtl_segment(),
            tap_from_output=m.tap_from_output_mm * mm,
            r0=self.line.R0_ohm,
        )

    def with_design(self) -> "DeviceDescription":
        """The description with ``design`` overrides folded in.

        The LHTL cell is impedance-scaled to Z_M so its dispersion is unchanged.
        E_C follows the new capacitances and E_J0 is rescaled so the maximum
        qubit frequency stays put.
        """
        d = self.design
        if d is None:
            return self
        m, q = self.metamaterial, self.qubit
        cell = LhtlCell(C_l=m.C_l_fF, L_l=m.L_l_nH, L_r=m.L_r_nH, C_r=m.C_r_fF)
        if d.Z_M_ohm is not None:
            # work in nH/fF: sqrt(nH/fF) = sqrt(1e6) * sqrt(H/F)
            cell = cell.scaled_to(d.Z_M_ohm / 1e3)
        m2 = replace(
            m,
            N_cells=d.N_cells or m.N_cells,
            L_l_nH=cell.L_l,
            C_l_fF=cell.C_l,
            L_r_nH=cell.L_r,
            C_r_fF=cell.C_r,
        )
        q2 = replace(
            q,
            C_QM_fF=d.C_QM_fF if d.C_QM_fF is not None else q.C_QM_fF,
            C_Q_fF=d.C_Q_fF if d.C_Q_fF is not None else q.C_Q_fF,
        )
        ec = charging_energy_ghz((q2.C_Q_fF + 2 * q2.C_J_fF + q2.C_QR_fF + q2.C_QM_fF) * fF)
        # keep the upper sweet spot: E_J0 from f01_max = sqrt(8 E_J0 E_C) - E_C
        q2 = replace(q2, E_C_GHz=ec, E_J0_GHz=(q.f01_max_GHz + ec) ** 2 / (8 * ec))
        return replace(self, metamaterial=m2, qubit=q2)

    def design_spec(self, lossy=True) -> HybridResonatorSpec:
        """Resonator with the lumped right-handed section of the design overrides."""
        d = self.design
        if d is None or d.N_r is None:
            raise ValueError(f"device {self.name!r} has no lumped-RHTL design section")
        dev = self.with_design()
        m = dev.metamaterial
        return HybridResonatorSpec(
            n_cells=m.N_cells,
            cell=dev.cell(lossy),
            c_in=m.C_cM_in_fF * fF,
            c_out=m.C_cM_out_fF * fF,
            rhtl=LumpedRhtl(d.N_r, d.L_RH_nH * nH, d.C_RH_fF * fF),
            tap_from_output=d.tap_from_output_cells,
            r0=self.line.R0_ohm,
        )

    def to_dict(self):
        out = asdict(self)
        if self.design is None:
            out.pop("design")
        else:
            out["design"]["window_GHz"] = list(self.design.window_GHz)
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


_SECTIONS = {
    "metamaterial": MetamaterialParams,
    "qubit": QubitParams,
    "readout": ReadoutParams,
    "line": LineParams,
    "sweep": SweepParams,
    "design": DesignParams,
}
_REQUIRED_SECTIONS = ("metamaterial", "qubit", "readout")
_INTEGER_FIELDS = {"N_cells", "points", "flux_points", "N_r", "tap_from_output_cells"}
_NONNEGATIVE = {"L_r_nH", "C_r_fF", "tap_from_output_mm", "tap_from_output_cells"}


def _coerce(section, name, value, problems):
    path = f"{section}.{name}"
    if value is None:
        return None
    if name == "window_GHz":
        try:
            lo, hi = (float(v) for v in value)
        except (TypeError, ValueError):
            problems.append((path, "expected a pair of numbers"))
            return None
        if not lo < hi:
            problems.append((path, "window must satisfy lo < hi"))
        return (lo, hi)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append((path, f"expected a number, got {value!r}"))
        return None
    if name in _INTEGER_FIELDS:
        if int(value) != value:
            problems.append((path, "expected an integer"))
            return None
        value = int(value)
    if not np.isfinite(value):
        problems.append((path, "must be finite"))
        return None
    if name in _NONNEGATIVE:
        if value < 0:
            problems.append((path, "must be >= 0"))
    elif value <= 0:
        problems.append((path, "must be > 0"))
    return value


def _build_section(name, raw, problems):
    cls = _SECTIONS[name]
    if not isinstance(raw, dict):
        problems.append((name, "expected an object"))
        return None
    known = {f.name: f for f in fields(cls)}
    for key in raw:
        if key not in known:
            problems.append((f"{name}.{key}", "unknown field (check the unit suffix)"))
    kwargs = {}
    for fname, f in known.items():
        has_default = f.default is not MISSING or f.default_factory is not MISSING
        if raw.get(fname) is None:
            if not has_default:
                problems.append((f"{name}.{fname}", "missing required field"))
            continue
        kwargs[fname] = _coerce(name, fname, raw[fname], problems)
    try:
        return cls(**{k: v for k, v in kwargs.items() if v is not None})
    except TypeError:
        return None


def _cross_checks(dev: DeviceDescription, problems):
    q = dev.qubit
    ec = charging_energy_ghz(dev.c_sigma)
    if abs(ec - q.E_C_GHz) > 0.05 * q.E_C_GHz:
        problems.append(("qubit.E_C_GHz", f"inconsistent with listed capacitances (e^2/2C_sigma = {ec:.4f} GHz)"))
    f01 = np.sqrt(8 * q.E_J0_GHz * q.E_C_GHz) - q.E_C_GHz
    if abs(f01 - q.f01_max_GHz) > 0.03 * q.f01_max_GHz:
        problems.append(("qubit.f01_max_GHz", f"inconsistent with E_J0 and E_C (asymptotic f01 = {f01:.3f} GHz)"))
    m = dev.metamaterial
    if m.tap_from_output_mm > m.rhtl_length_mm:
        problems.append(("metamaterial.tap_from_output_mm", "tap lies beyond the RHTL length"))
    s = dev.sweep
    if s.fmin_GHz >= s.fmax_GHz:
        problems.append(("sweep.fmin_GHz", "must be below sweep.fmax_GHz"))
    d = dev.design
    if d is not None:
        if d.N_r is not None:
            for fname in ("L_RH_nH", "C_RH_fF"):
                if getattr(d, fname) is None:
                    problems.append((f"design.{fname}", "required when design.N_r is given"))
            if d.tap_from_output_cells > d.N_r:
                problems.append(("design.tap_from_output_cells", "tap lies beyond the lumped RHTL"))


def from_dict(raw, name="device") -> DeviceDescription:
    problems = []
    if not isinstance(raw, dict):
        raise ValidationError([("", "top level must be a JSON object")])
    for key in raw:
        if key not in _SECTIONS and key != "name":
            problems.append((key, "unknown section"))
    sections = {}
    for sec in _SECTIONS:
        if sec not in raw:
            if sec in _REQUIRED_SECTIONS:
                problems.append((sec, "missing required section"))
            continue
        sections[sec] = _build_section(sec, raw[sec], problems)
    if problems:
        raise ValidationError(problems)
    dev = DeviceDescription(name=str(raw.get("name", name)), **{k: v for k, v in sections.items() if v is not None})
    _cross_checks(dev, problems)
    if problems:
        raise ValidationError(problems)
    return dev


def parse_device(path) -> DeviceDescription:
    """Load and validate a description from a path or a bundled name."""
    if str(path) in BUNDLED:
        text = resources.files("lhcqed").joinpath(f"data/{path}.json").read_text()
        name = str(path)
    else:
        p = Path(path)
        text = p.read_text()
        name = p.stem
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError([("", f"invalid JSON: {exc}")]) from exc
    return from_dict(raw, name=name)


def load_bundled(name="paper-device") -> DeviceDescription:
    return parse_device(name)
