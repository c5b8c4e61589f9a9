"""Qubit-mode coupling strengths.

Three routes are provided:

* quantum fit: the single-mode charge-basis Hamiltonian is fit to observed
  avoided-crossing branches, with g as the only free parameter;
* semiclassical splitting: the qubit is a tunable LC at the probe node of the
  circuit model, swept through a mode while the minimum separation of the
  two |S21| branches is located;
* residue: for a linear circuit the splitting follows from the slope of the
  probe-node susceptance at each mode, which stays well defined when
  splittings from neighbouring modes merge.

Couplings are stored in rad/s in two conventions: the Hamiltonian prefactor
g (coupling term g n (a + a^dag)) and the half-splitting g |<0|n|1>|.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .errors import DomainError, FitError, ResolutionError
from .hamiltonian import (
    CoupledSystemSpec,
    ModeSpec,
    TransmonSpec,
    build_hamiltonian,
    charge_matrix_element,
    diagonalize,
    f01_bare,
    flux_for_f01,
)
from .metamaterial import HybridNetwork, HybridResonatorSpec, build_hybrid_network
from .modes import ModeCatalog, find_peaks, SpectrumTrace
from .units import GHz, fF

TWO_PI_GHZ = 2 * np.pi * GHz
TWO_PI_MHZ = 2 * np.pi * 1e6
# branches must stand within 40 dB of the tallest peak; weaker maxima are interference ripples
BRANCH_PROMINENCE = 1e-2


# ---------------------------------------------------------------- records


@dataclass(frozen=True)
class SplittingObservation:
    """Two branch frequencies (GHz) per flux point near mode ``mode_index``."""

    flux: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    mode_index: int
    omega_mode: float

    def __post_init__(self):
        flux = np.asarray(self.flux, dtype=float)
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if not (flux.shape == lo.shape == hi.shape) or flux.ndim != 1:
            raise DomainError("flux and branches must be 1-D arrays of equal length")
        if flux.size > 1 and not np.all(np.diff(flux) > 0):
            raise DomainError("flux grid must be increasing")
        if np.any(lo > hi):
            raise DomainError("lower branch above upper branch")
        for name, v in (("flux", flux), ("lower", lo), ("upper", hi)):
            object.__setattr__(self, name, v)

    @property
    def min_gap(self):
        """Smallest branch separation (GHz)."""
        return float(np.min(self.upper - self.lower))


@dataclass(frozen=True)
class CouplingRecord:
    mode_index: int
    omega: float
    g_prefactor: float
    g_halfsplit: float
    method: str
    residual: float = 0.0

    def __post_init__(self):
        if not (self.g_halfsplit >= 0 or math.isnan(self.g_halfsplit)):
            raise DomainError("coupling must be >= 0")
        if not math.isfinite(self.residual):
            raise DomainError("residual must be finite")

    def g(self, convention="halfsplit"):
        return self.g_halfsplit if convention == "halfsplit" else self.g_prefactor


@dataclass(frozen=True)
class CouplingSet:
    records: tuple[CouplingRecord, ...]
    E_J0: float | None = None
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def omegas(self):
        return np.array([r.omega for r in self.records])

    def g(self, convention="halfsplit"):
        return np.array([r.g(convention) for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mode_index", "f_GHz", "g_MHz_prefactor", "g_MHz_halfsplit", "method", "residual"])
        for r in self.records:
            w.writerow(
                [
                    r.mode_index,
                    f"{r.omega / TWO_PI_GHZ:.9f}",
                    f"{r.g_prefactor / TWO_PI_MHZ:.6f}",
                    f"{r.g_halfsplit / TWO_PI_MHZ:.6f}",
                    r.method,
                    f"{r.residual:.3e}",
                ]
            )
        return buf.getvalue()


# ------------------------------------------------------- global E_J0 fit


def fit_global_ej0(points, E_C, guess=None, n_max=10):
    """E_J0 (GHz) such that the bare f_01(flux) passes through crossing points.

    ``points`` is a sequence of (reduced flux, omega_i in rad/s).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise FitError("no crossing points")
    flux, f = pts[:, 0], pts[:, 1] / TWO_PI_GHZ
    if pts.shape[0] > 1 and np.ptp(np.abs(flux)) == 0:
        raise FitError("crossing points all lie at the same flux", {"flux": float(flux[0])})

    def model(ej0):
        return f01_bare(TransmonSpec(E_C, ej0, n_max=n_max), flux)

    cosf = np.abs(np.cos(np.pi * flux))
    if guess is None:
        # asymptotic f01 = sqrt(8 E_J E_C) - E_C
        guess = float(np.mean((f + E_C) ** 2 / (8 * E_C * np.maximum(cosf, 1e-3))))
    if pts.shape[0] == 1:
        try:
            return optimize.brentq(lambda x: model(x)[0] - f[0], guess / 4, guess * 4, xtol=1e-12)
        except ValueError as exc:
            raise FitError("single-point E_J0 solve failed to bracket a root", {"guess": guess}) from exc
    sol = optimize.least_squares(lambda p: model(p[0]) - f, [guess], bounds=([1e-6], [np.inf]), xtol=1e-14, ftol=1e-14)
    if not sol.success:
        raise FitError("global E_J0 fit did not converge", {"message": sol.message})
    return float(sol.x[0])


# ------------------------------------------------------- quantum fit


def _branches(system: CoupledSystemSpec, flux, f_target):
    """The two single-excitation transitions (GHz) closest to ``f_target`` at each flux."""
    n_single = 1 + len(system.modes)
    lo, hi = np.empty(len(flux)), np.empty(len(flux))
    for p, phi in enumerate(flux):
        w, _ = diagonalize(build_hamiltonian(system, phi), n_single + 1)
        t = w[1 : n_single + 1] - w[0]
        pick = np.sort(t[np.argsort(np.abs(t - f_target))[:2]])
        lo[p], hi[p] = pick
    return lo, hi


def synthesize_splitting(transmon: TransmonSpec, modes: Sequence[ModeSpec], mode_index, flux, noise_ghz=0.0, rng=None):
    """Forward-model branches near ``modes[mode_index]`` from the full multimode Hamiltonian."""
    system = CoupledSystemSpec(transmon, tuple(modes))
    f_i = modes[mode_index].f_ghz
    flux = np.asarray(flux, dtype=float)
    lo, hi = _branches(system, flux, f_i)
    if noise_ghz:
        rng = np.random.default_rng(rng)
        lo = lo + rng.normal(0, noise_ghz, lo.shape)
        hi = hi + rng.normal(0, noise_ghz, hi.shape)
        lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
    return SplittingObservation(flux, lo, hi, mode_index, modes[mode_index].omega)


def crossing_flux_window(transmon: TransmonSpec, omega_mode, half_width_ghz, points=41):
    """Flux grid over which the bare f_01 sweeps ``omega_mode`` +- ``half_width_ghz``."""
    f = omega_mode / TWO_PI_GHZ
    fmax = f01_bare(transmon, 0.0)[0]
    a = flux_for_f01(transmon, min(f + half_width_ghz, fmax - 1e-9))
    b = flux_for_f01(transmon, f - half_width_ghz)
    return np.linspace(a, b, points)


def quantum_objective(obs: SplittingObservation, transmon: TransmonSpec, g, m_max=3):
    """Sum of squared branch residuals (GHz^2) for the single-mode model with coupling g (rad/s)."""
    system = CoupledSystemSpec(transmon, (ModeSpec(obs.omega_mode, float(g), m_max),))
    lo, hi = _branches(system, obs.flux, obs.omega_mode / TWO_PI_GHZ)
    return float(np.sum((lo - obs.lower) ** 2 + (hi - obs.upper) ** 2))


def fit_g_quantum(obs: SplittingObservation, transmon: TransmonSpec, g_max=None, m_max=3) -> CouplingRecord:
    """Single-mode Hamiltonian fit with g as the only free parameter."""
    n01 = charge_matrix_element(transmon, _crossing_flux(transmon, obs.omega_mode))
    # the minimum gap is ~2 g n01; search comfortably beyond it
    g_est = obs.min_gap * TWO_PI_GHZ / (2 * n01)
    g_hi = g_max or max(3 * g_est, 2 * np.pi * 1e6)
    trace = []

    def f(g):
        v = quantum_objective(obs, transmon, g, m_max)
        trace.append((g, v))
        return v

    sol = optimize.minimize_scalar(f, bounds=(0.0, g_hi), method="bounded", options={"xatol": 1e-7 * g_hi, "maxiter": 200})
    if not sol.success:
        raise FitError("coupling fit did not converge", {"message": sol.message, "trace": trace})
    g = float(sol.x)
    return CouplingRecord(obs.mode_index, obs.omega_mode, g, g * n01, "quantum-fit", float(sol.fun))


def _crossing_flux(transmon, omega):
    try:
        return flux_for_f01(transmon, omega / TWO_PI_GHZ)
    except DomainError:
        return 0.0


def halfsplit_factor(transmon: TransmonSpec, omega):
    """|<0|n|1>| at the flux where the bare qubit is resonant with ``omega``."""
    return charge_matrix_element(transmon, _crossing_flux(transmon, omega))


# ------------------------------------------------------- semiclassical


@dataclass(frozen=True)
class QubitCircuit:
    """Linearised qubit: C_a = C_Q + 2 C_J to ground, a tunable inductor, an
    optional extra branch ``z_branch(omega)`` to ground (e.g. C_QR plus the
    readout resonator), all coupled to the probe node through C_QM.
    """

    C_a: float
    C_QM: float
    C_branch: float = 0.0
    z_branch: Callable | None = None

    def __post_init__(self):
        if not (self.C_a > 0 and self.C_QM > 0) or self.C_branch < 0:
            raise DomainError("qubit capacitances must be > 0")

    @property
    def c_sigma(self):
        return self.C_a + self.C_QM + self.C_branch

    def inductance(self, omega_q):
        """Inductance that places the bare LC resonance 1/sqrt(L C_sigma) at ``omega_q``."""
        return 1.0 / (omega_q**2 * self.c_sigma)

    def island_admittance(self, omega, omega_q):
        w = np.asarray(omega, dtype=float)
        y = 1j * w * self.C_a + 1 / (1j * w * self.inductance(omega_q))
        if self.z_branch is not None:
            y = y + 1 / self.z_branch(w)
        elif self.C_branch > 0:
            y = y + 1j * w * self.C_branch
        return y

    def tap_admittance(self, omega, omega_q):
        w = np.asarray(omega, dtype=float)
        y_c = 1j * w * self.C_QM
        y_i = self.island_admittance(w, omega_q)
        # series combination; finite when the island admittance vanishes
        den = y_c + y_i
        # the bare qubit pole can land exactly on a grid point
        den = np.where(den == 0, 1e-15 * np.abs(y_c), den)
        return y_c * y_i / den

    @classmethod
    def from_device(cls, dev, with_readout=True):
        from .purcell import EnvironmentSpec, readout_impedance

        q = dev.qubit
        z = None
        if with_readout:
            env = EnvironmentSpec.from_device(dev)
            z = lambda w: readout_impedance(env, w)  # noqa: E731
        return cls(C_a=(q.C_Q_fF + 2 * q.C_J_fF) * fF, C_QM=q.C_QM_fF * fF, C_branch=q.C_QR_fF * fF, z_branch=z)


def _refine_peak(x, y, i):
    """Vertex of the parabola through the three samples around index ``i``."""
    if i <= 0 or i >= y.size - 1:
        return x[i]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2 * y1 + y2
    if den == 0:
        return x[i]
    return x[i] + 0.5 * (y0 - y2) / den * (x[i + 1] - x[i])


def branch_separation(net: HybridNetwork, qubit: QubitCircuit, omega_q, omega_mode, prominence=BRANCH_PROMINENCE):
    """Separation (rad/s) between the two |S21| peaks nearest ``omega_mode``; NaN if unresolved."""
    s = net.s21(qubit.tap_admittance(net.omega, omega_q))
    trace = SpectrumTrace(net.omega, s)
    pk = find_peaks(trace, prominence=prominence)
    if pk.size < 2:
        return math.nan
    db = trace.db
    pos = np.array([_refine_peak(net.omega, db, i) for i in pk])
    two = np.sort(pos[np.argsort(np.abs(pos - omega_mode))[:2]])
    return float(two[1] - two[0])


def extract_g_semiclassical(
    spec: HybridResonatorSpec,
    qubit: QubitCircuit,
    omega_mode,
    half_window=None,
    points=3001,
    coarse=41,
    neighbours=None,
    transmon: TransmonSpec | None = None,
    mode_index=-1,
) -> CouplingRecord:
    """Half the minimum branch separation as the bare qubit is swept through a mode.

    A coarse sweep of the qubit frequency brackets the minimum, and a bounded
    scalar (golden-section/Brent) search refines it. ``neighbours`` (rad/s)
    sets the default window to 45% of the nearest mode spacing.
    """
    if half_window is None:
        if neighbours is not None and len(neighbours) > 0:
            d = np.abs(np.asarray(neighbours, dtype=float) - omega_mode)
            d = d[d > 0]
            half_window = 0.45 * d.min() if d.size else 0.02 * omega_mode
        else:
            half_window = 0.02 * omega_mode
    w = np.linspace(omega_mode - half_window, omega_mode + half_window, points)
    net = build_hybrid_network(spec, w)
    step = w[1] - w[0]

    qs = np.linspace(omega_mode - 0.8 * half_window, omega_mode + 0.8 * half_window, coarse)
    seps = np.array([branch_separation(net, qubit, q, omega_mode) for q in qs])
    ok = np.isfinite(seps)
    if not ok.any():
        raise ResolutionError(
            f"no pair of branches resolved near {omega_mode / TWO_PI_GHZ:.4f} GHz; use a finer frequency grid"
        )
    j = int(np.nanargmin(seps))
    lo, hi = qs[max(j - 1, 0)], qs[min(j + 1, coarse - 1)]

    def obj(q):
        s = branch_separation(net, qubit, q, omega_mode)
        return s if np.isfinite(s) else seps[j] * 10

    sol = optimize.minimize_scalar(obj, bounds=(lo, hi), method="bounded", options={"xatol": step * 1e-3})
    best = min(float(sol.fun), float(seps[j]))
    if best < 3 * step:
        raise ResolutionError(
            f"minimum separation {best / TWO_PI_MHZ:.3f} MHz near {omega_mode / TWO_PI_GHZ:.4f} GHz "
            "is within the grid resolution; use a finer frequency grid"
        )
    g_half = best / 2
    n01 = halfsplit_factor(transmon, omega_mode) if transmon is not None else math.nan
    return CouplingRecord(mode_index, float(omega_mode), g_half / n01, g_half, "semiclassical", step / 2)


def residue_couplings(net: HybridNetwork, qubit: QubitCircuit, transmon: TransmonSpec | None = None):
    """Couplings from the susceptance slope at each parallel resonance of the probe node.

    At a zero of B = Im(1/Z_tap) with positive slope, the mode looks like a
    parallel LC with capacitance C_i = (dB/domega)/2, and two capacitively
    coupled resonators give g = C_QM omega / (2 sqrt((C_q + C_QM)(C_i + C_QM))),
    with C_q the qubit capacitance to ground other than C_QM.
    """
    w = net.omega
    b = np.imag(1 / net.tap_impedance())
    cross = np.flatnonzero((b[:-1] < 0) & (b[1:] >= 0))
    c_q = qubit.c_sigma - qubit.C_QM
    out = []
    for k, i in enumerate(cross):
        wi = w[i] - b[i] * (w[i + 1] - w[i]) / (b[i + 1] - b[i])
        ci = (b[i + 1] - b[i]) / (w[i + 1] - w[i]) / 2
        g = 0.5 * qubit.C_QM * wi / np.sqrt((c_q + qubit.C_QM) * (ci + qubit.C_QM))
        n01 = halfsplit_factor(transmon, wi) if transmon is not None else math.nan
        out.append(CouplingRecord(k, float(wi), float(g / n01), float(g), "residue", 0.0))
    return out


def couplings_for_catalog(
    spec: HybridResonatorSpec,
    qubit: QubitCircuit,
    cat: ModeCatalog,
    transmon: TransmonSpec | None = None,
    omega_max=None,
    points=3001,
    coarse=41,
) -> CouplingSet:
    """Semiclassical splitting g for every catalog mode (below ``omega_max`` if given)."""
    omegas = cat.omegas
    records, warnings = [], []
    for i, wi in enumerate(omegas):
        if omega_max is not None and wi > omega_max:
            continue
        try:
            rec = extract_g_semiclassical(
                spec, qubit, wi, neighbours=omegas, transmon=transmon, mode_index=i, points=points, coarse=coarse
            )
            records.append(rec)
        except ResolutionError as exc:
            warnings.append(str(exc))
    E_J0 = transmon.E_J0 if transmon is not None else None
    return CouplingSet(tuple(records), E_J0=E_J0, warnings=tuple(warnings))


def superstrong_ratio(couplings, omegas, convention="halfsplit"):
    """g_i / (omega_{i+1} - omega_i) per mode; None for the highest mode.

    ``omegas`` are the mode frequencies (rad/s) sharing the couplings' indexing,
    or a ModeCatalog.
    """
    w = omegas.omegas if isinstance(omegas, ModeCatalog) else np.asarray(omegas, dtype=float)
    g = couplings.g(convention) if isinstance(couplings, CouplingSet) else np.asarray(couplings, dtype=float)
    if g.size != w.size:
        raise DomainError("couplings and catalog must share mode indexing")
    out = []
    for i in range(w.size):
        out.append(None if i == w.size - 1 else float(g[i] / (w[i + 1] - w[i])))
    return out


# ------------------------------------------------- multimode Hamiltonian fit


@dataclass(frozen=True)
class BranchMap:
    """|S21| peak positions (rad/s) of the circuit model per bare qubit frequency."""

    omega_q: np.ndarray
    peaks: tuple[np.ndarray, ...]

    def rows(self):
        for wq, pk in zip(self.omega_q, self.peaks):
            for p in pk:
                yield float(wq), float(p)


def circuit_branches(net: HybridNetwork, qubit: QubitCircuit, omega_q, prominence=BRANCH_PROMINENCE) -> BranchMap:
    """Peaks of |S21| on ``net``'s grid as the linearised qubit is tuned through ``omega_q``."""
    peaks = []
    for wq in np.asarray(omega_q, dtype=float):
        trace = SpectrumTrace(net.omega, net.s21(qubit.tap_admittance(net.omega, wq)))
        pk = find_peaks(trace, prominence=prominence)
        db = trace.db
        peaks.append(np.array([_refine_peak(net.omega, db, i) for i in pk]))
    return BranchMap(np.asarray(omega_q, dtype=float), tuple(peaks))


def circuit_splitting(
    spec: HybridResonatorSpec,
    qubit: QubitCircuit,
    transmon: TransmonSpec,
    omega_mode,
    half_window,
    points=3001,
    n_qubit=25,
    mode_index=-1,
) -> SplittingObservation:
    """Branches of the circuit model near one mode, expressed on the transmon's flux axis.

    The linearised qubit is tuned across ``omega_mode`` +- 60% of
    ``half_window``; at each step the two |S21| peaks nearest the mode are
    recorded and the bare qubit frequency is mapped to flux through ``transmon``.
    Steps where only one branch is visible are dropped.
    """
    w = np.linspace(omega_mode - half_window, omega_mode + half_window, points)
    net = build_hybrid_network(spec, w)
    wq = np.linspace(omega_mode - 0.6 * half_window, omega_mode + 0.6 * half_window, n_qubit)
    branches = circuit_branches(net, qubit, wq)
    flux, lo, hi = [], [], []
    for q, pk in zip(wq, branches.peaks):
        # far from the crossing the qubit-like branch can fade below the peak threshold
        if pk.size < 2:
            continue
        two = np.sort(pk[np.argsort(np.abs(pk - omega_mode))[:2]])
        flux.append(flux_for_f01(transmon, q / TWO_PI_GHZ))
        lo.append(two[0] / TWO_PI_GHZ)
        hi.append(two[1] / TWO_PI_GHZ)
    if len(flux) < max(5, n_qubit // 2):
        raise ResolutionError(f"branches unresolved near {omega_mode / TWO_PI_GHZ:.4f} GHz; use a finer frequency grid")
    order = np.argsort(flux)
    return SplittingObservation(
        np.asarray(flux)[order], np.asarray(lo)[order], np.asarray(hi)[order], mode_index, float(omega_mode)
    )


def _single_excitation(system: CoupledSystemSpec, flux):
    n = 1 + len(system.modes)
    w, _ = diagonalize(build_hamiltonian(system, flux), n + 1)
    return w[1 : n + 1] - w[0]


def multimode_residuals(branches: BranchMap, system: CoupledSystemSpec, fluxes):
    """Distance (GHz) from each circuit branch to the nearest single-excitation level."""
    out = []
    for phi, pk in zip(fluxes, branches.peaks):
        if pk.size == 0:
            continue
        t = _single_excitation(system, phi)
        out.append(np.min(np.abs(pk[:, None] / TWO_PI_GHZ - t[None, :]), axis=1))
    return np.concatenate(out) if out else np.array([])


def fit_g_multimode(
    branches: BranchMap,
    transmon: TransmonSpec,
    mode_omegas,
    g0,
    m_max=1,
    transmon_levels=3,
) -> CouplingSet:
    """Adjust the couplings of a multimode Hamiltonian to match circuit branches.

    Every circuit branch is matched to the nearest single-excitation level of
    the Hamiltonian and the squared distances are minimised over all g_i at
    once. The transmon is represented by its lowest ``transmon_levels``
    eigenstates and each mode by ``m_max + 1`` Fock states, enough for the
    single-excitation manifold and its leading corrections.

    The problem is poorly conditioned when modes outside ``mode_omegas`` push
    branches into the window, so the rms residual should be checked.
    """
    mode_omegas = np.asarray(mode_omegas, dtype=float)
    fmax = f01_bare(transmon, 0.0)[0]
    fluxes = []
    for wq in branches.omega_q:
        f = wq / TWO_PI_GHZ
        if not f < fmax:
            raise DomainError(f"bare qubit frequency {f:.4f} GHz above the transmon maximum {fmax:.4f} GHz")
        fluxes.append(flux_for_f01(transmon, f))
    base = CoupledSystemSpec(
        transmon, tuple(ModeSpec(w, 0.0, m_max) for w in mode_omegas), transmon_levels=transmon_levels
    )
    scale = TWO_PI_MHZ * 100

    def resid(x):
        return multimode_residuals(branches, base.with_couplings(x * scale), fluxes)

    x0 = np.asarray(g0, dtype=float) / scale
    sol = optimize.least_squares(resid, x0, bounds=(0, np.inf), xtol=1e-10, ftol=1e-12)
    if not sol.success:
        raise FitError("multimode coupling fit did not converge", {"message": sol.message, "x": sol.x.tolist()})
    g = sol.x * scale
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    recs = tuple(
        CouplingRecord(i, float(w), float(gi), float(gi * halfsplit_factor(transmon, w)), "hamiltonian-fit", rms)
        for i, (w, gi) in enumerate(zip(mode_omegas, g))
    )
    return CouplingSet(recs, E_J0=transmon.E_J0)
