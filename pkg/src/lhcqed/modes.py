"""Resonance detection and Lorentzian fitting of transmission spectra."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, signal

from .errors import DomainError, FitError
from .metamaterial import SpectrumTrace

log = logging.getLogger(__name__)

WINDOW_HALF_WIDTHS = 3.0
JOINT_FIT_SEPARATION = 1.5
MIN_WINDOW_POINTS = 7


@dataclass(frozen=True)
class ModeRecord:
    omega: float
    kappa: float
    peak: float
    residual: float = 0.0

    def __post_init__(self):
        if not (self.omega > 0 and self.kappa > 0):
            raise DomainError("mode frequency and linewidth must be > 0")

    @property
    def q(self):
        return self.omega / self.kappa

    @property
    def f_ghz(self):
        return self.omega / (2 * np.pi * 1e9)

    @property
    def kappa_mhz(self):
        return self.kappa / (2 * np.pi * 1e6)


@dataclass(frozen=True)
class ModeCatalog:
    records: tuple[ModeRecord, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        recs = tuple(sorted(self.records, key=lambda r: r.omega))
        if any(b.omega <= a.omega for a, b in zip(recs, recs[1:])):
            raise DomainError("mode frequencies must be distinct")
        object.__setattr__(self, "records", recs)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def omegas(self):
        return np.array([r.omega for r in self.records])

    @property
    def f_ghz(self):
        return self.omegas / (2 * np.pi * 1e9)

    @property
    def kappas(self):
        return np.array([r.kappa for r in self.records])

    @property
    def q(self):
        return np.array([r.q for r in self.records])

    @property
    def spacings(self):
        """omega_{i+1} - omega_i."""
        return np.diff(self.omegas)

    def below(self, omega_max) -> "ModeCatalog":
        return ModeCatalog(tuple(r for r in self.records if r.omega < omega_max), self.warnings)

    def between(self, omega_lo, omega_hi) -> "ModeCatalog":
        return ModeCatalog(tuple(r for r in self.records if omega_lo <= r.omega <= omega_hi), self.warnings)

    def nearest(self, omega) -> int:
        return int(np.argmin(np.abs(self.omegas - omega)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["f_GHz", "kappa_MHz", "Q", "peak_dB", "residual"])
        for r in self.records:
            w.writerow([f"{r.f_ghz:.9f}", f"{r.kappa_mhz:.6f}", f"{r.q:.3f}", f"{20 * np.log10(r.peak):.4f}", f"{r.residual:.3e}"])
        return buf.getvalue()


def lorentzian_power(omega, omega0, kappa, amplitude, baseline=0.0):
    """A (k/2)^2 / ((w - w0)^2 + (k/2)^2) + baseline."""
    hk = kappa / 2
    return amplitude * hk**2 / ((omega - omega0) ** 2 + hk**2) + baseline


def find_peaks(trace: SpectrumTrace, prominence=1e-3, min_spacing=0.0, relative=True):
    """Indices of local maxima of |S21|.

    ``prominence`` is a fraction of max |S21| when ``relative`` is true,
    otherwise an absolute |S21| value. ``min_spacing`` is in rad/s.
    """
    mag = trace.magnitude
    if mag.size < 3:
        raise ValueError("need at least 3 points to find peaks")
    top = mag.max()
    if top <= 0:
        return np.array([], dtype=int)
    thresh = prominence * top if relative else prominence
    distance = None
    if min_spacing > 0:
        step = np.median(np.diff(trace.omega))
        distance = max(1, int(np.floor(min_spacing / step)))
    idx, _ = signal.find_peaks(mag, prominence=thresh, distance=distance)
    return idx


def _half_width(omega, power, i, lo, hi):
    """Half width at half max (rad/s) of the peak at ``i``, searched within [lo, hi]."""
    base = min(power[lo], power[hi])
    half = base + (power[i] - base) / 2

    def crossing(step):
        j = i
        while lo < j < hi and power[j] > half:
            j += step
        if power[j] > half:
            return abs(omega[j] - omega[i])
        k = j - step
        # linear interpolation between j (below) and k (above)
        t = (power[k] - half) / (power[k] - power[j])
        return abs(omega[k] + t * (omega[j] - omega[k]) - omega[i])

    return 0.5 * (crossing(-1) + crossing(1))


def _valleys(power, peaks):
    """Index bounds [lo, hi] between each peak and its neighbours."""
    n = power.size
    bounds = []
    for j, p in enumerate(peaks):
        lo = 0 if j == 0 else peaks[j - 1] + int(np.argmin(power[peaks[j - 1] : p + 1]))
        hi = n - 1 if j == len(peaks) - 1 else p + int(np.argmin(power[p : peaks[j + 1] + 1]))
        bounds.append((lo, hi))
    return bounds


def _multi_lorentzian(params, omega, n):
    out = np.full_like(omega, params[-1])
    for j in range(n):
        w0, k, a = params[3 * j : 3 * j + 3]
        out += lorentzian_power(omega, w0, k, a)
    return out


def _fit(omega, power, guesses, max_nfev=2000):
    """Least-squares fit of ``len(guesses)`` Lorentzians plus a constant baseline.

    Frequencies are shifted and scaled by the first guess to keep the problem
    well conditioned.
    """
    n = len(guesses)
    w_ref = guesses[0][0]
    scale = max(g[1] for g in guesses)
    pscale = max(power.max(), 1e-300)
    x = (omega - w_ref) / scale
    y = power / pscale
    p0 = []
    for w0, k, a in guesses:
        p0 += [(w0 - w_ref) / scale, k / scale, a / pscale]
    p0.append(max(min(y.min(), 0.5), 0.0))

    def resid(p):
        return _multi_lorentzian(p, x, n) - y

    sol = optimize.least_squares(resid, p0, method="lm", max_nfev=max_nfev, xtol=1e-14, ftol=1e-14, gtol=1e-14)
    if not sol.success:
        raise FitError("Lorentzian fit did not converge", {"message": sol.message, "nfev": sol.nfev})
    p = sol.x
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    out = []
    for j in range(n):
        w0, k, a = p[3 * j : 3 * j + 3]
        out.append((w_ref + w0 * scale, abs(k) * scale, a * pscale))
    return out, p[-1] * pscale, rms


def fit_lorentzian(trace: SpectrumTrace, window: slice) -> ModeRecord:
    """Fit |S21|^2 inside ``window`` to a single Lorentzian on a constant baseline."""
    omega = trace.omega[window]
    power = np.abs(trace.s21[window]) ** 2
    if omega.size < MIN_WINDOW_POINTS:
        raise FitError(f"fit window has {omega.size} points, need >= {MIN_WINDOW_POINTS}")
    i = int(np.argmax(power))
    if i == 0 or i == omega.size - 1:
        raise FitError("no interior maximum in fit window", {"argmax": i})
    hw = _half_width(omega, power, i, 0, omega.size - 1)
    if not hw > 0:
        raise FitError("could not estimate a half width")
    (rec,), _, rms = _fit(omega, power, [(omega[i], 2 * hw, power[i] - power.min())])
    w0, k, a = rec
    if not (omega[0] <= w0 <= omega[-1]) or not k > 0 or not a > 0:
        raise FitError("fitted resonance outside window or non-physical", {"omega0": w0, "kappa": k, "amplitude": a})
    return ModeRecord(omega=w0, kappa=k, peak=float(np.sqrt(power[i])), residual=rms)


def catalog(trace: SpectrumTrace, prominence=1e-3, min_spacing=0.0, relative=True) -> ModeCatalog:
    """Detect peaks, fit each (jointly when they overlap) and collect the modes."""
    peaks = find_peaks(trace, prominence=prominence, min_spacing=min_spacing, relative=relative)
    if peaks.size == 0:
        return ModeCatalog()
    omega = trace.omega
    power = np.abs(trace.s21) ** 2
    bounds = _valleys(power, peaks)
    hws = [_half_width(omega, power, p, lo, hi) for p, (lo, hi) in zip(peaks, bounds)]

    groups = [[0]]
    for j in range(1, peaks.size):
        if omega[peaks[j]] - omega[peaks[j - 1]] < JOINT_FIT_SEPARATION * (hws[j] + hws[j - 1]):
            groups[-1].append(j)
        else:
            groups.append([j])

    records, warnings = [], []
    for g in groups:
        if len(g) > 2:
            # split long chains into pairs and singles
            sub = [g[i : i + 2] for i in range(0, len(g), 2)]
        else:
            sub = [g]
        for members in sub:
            try:
                records.extend(_fit_group(omega, power, peaks, hws, members))
            except FitError as exc:
                f = omega[peaks[members[0]]] / (2 * np.pi * 1e9)
                msg = f"mode near {f:.6f} GHz excluded: {exc}"
                log.warning(msg)
                warnings.append(msg)
    return ModeCatalog(tuple(records), tuple(warnings))


def _fit_group(omega, power, peaks, hws, members):
    first, last = peaks[members[0]], peaks[members[-1]]
    w_lo = omega[first] - WINDOW_HALF_WIDTHS * hws[members[0]]
    w_hi = omega[last] + WINDOW_HALF_WIDTHS * hws[members[-1]]
    lo = int(np.searchsorted(omega, w_lo, side="left"))
    hi = int(np.searchsorted(omega, w_hi, side="right"))
    sel = slice(lo, hi)
    if hi - lo < MIN_WINDOW_POINTS * len(members):
        raise FitError(f"fit window has {hi - lo} points; grid too coarse for this linewidth")
    guesses = [(omega[peaks[m]], 2 * hws[m], power[peaks[m]]) for m in members]
    fits, _, rms = _fit(omega[sel], power[sel], guesses)
    out = []
    for (w0, k, a), m in zip(fits, members):
        if not (omega[lo] <= w0 <= omega[hi - 1]) or not k > 0 or not a > 0:
            raise FitError("fitted resonance outside window or non-physical", {"omega0": w0, "kappa": k})
        out.append(ModeRecord(omega=w0, kappa=k, peak=float(np.sqrt(power[peaks[m]])), residual=rms))
    return out


def synthesize_trace(cat: ModeCatalog, grid, baseline=0.0) -> SpectrumTrace:
    """|S21| = sqrt(sum of power Lorentzians) for each catalog record."""
    w = np.asarray(grid.omega if hasattr(grid, "omega") else grid, dtype=float)
    p = np.full_like(w, baseline)
    for r in cat:
        p += lorentzian_power(w, r.omega, r.kappa, r.peak**2)
    return SpectrumTrace(omega=w, s21=np.sqrt(p).astype(complex))
