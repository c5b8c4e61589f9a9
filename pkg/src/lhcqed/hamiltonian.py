"""Charge-basis transmon coupled to harmonic modes.

    H = 4 E_C (n - n_g)^2 - E_J/2 sum_n (|n+1><n| + h.c.)
        + sum_i f_i (a_i^dag a_i + 1/2) + sum_i g_i n (a_i + a_i^dag)

All energies are frequencies in GHz (E/h). Mode frequencies and couplings
are given in rad/s on the spec objects and converted on assembly. The tensor
order is transmon first, then the modes in the order given.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import linalg, sparse
from scipy.optimize import linear_sum_assignment
from scipy.sparse.linalg import eigsh

from .errors import ConfigurationError, DomainError, ResolutionError

DENSE_LIMIT = 4096
SPARSE_LEVELS = 20
TRACK_THRESHOLD = 0.5
TWO_PI_GHZ = 2 * np.pi * 1e9


@dataclass(frozen=True)
class TransmonSpec:
    E_C: float
    E_J0: float
    n_g: float = 0.0
    asymmetry: float = 0.0
    n_max: int = 10

    def __post_init__(self):
        if not (self.E_C > 0 and self.E_J0 > 0):
            raise DomainError("E_C and E_J0 must be > 0")
        if self.n_max < 1 or int(self.n_max) != self.n_max:
            raise DomainError("charge truncation n_max must be a positive integer")
        if not 0 <= self.asymmetry < 1:
            raise DomainError("junction asymmetry must lie in [0, 1)")

    @property
    def dim(self):
        return 2 * self.n_max + 1


@dataclass(frozen=True)
class ModeSpec:
    omega: float
    g: float
    m_max: int = 3

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError("mode frequency must be > 0")
        if self.m_max < 1:
            raise DomainError("Fock truncation must be >= 1")

    @property
    def f_ghz(self):
        return self.omega / TWO_PI_GHZ

    @property
    def g_ghz(self):
        return self.g / TWO_PI_GHZ


@dataclass(frozen=True)
class CoupledSystemSpec:
    """Transmon plus modes.

    ``transmon_levels`` optionally replaces the charge basis by the lowest few
    bare transmon eigenstates, which is much cheaper for fits that only need
    the lowest excitation manifolds.
    """

    transmon: TransmonSpec
    modes: tuple[ModeSpec, ...] = ()
    max_dim: int = 100_000
    transmon_levels: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.transmon_levels is not None and not 2 <= self.transmon_levels <= self.transmon.dim:
            raise ConfigurationError("transmon_levels must lie between 2 and the charge-basis size")
        if self.dim > self.max_dim:
            raise ConfigurationError(f"Hilbert dimension {self.dim} exceeds the cap {self.max_dim}")

    @property
    def dims(self):
        nt = self.transmon_levels or self.transmon.dim
        return (nt,) + tuple(m.m_max + 1 for m in self.modes)

    @property
    def dim(self):
        return int(np.prod(self.dims))

    def with_couplings(self, g) -> "CoupledSystemSpec":
        g = np.broadcast_to(np.asarray(g, dtype=float), (len(self.modes),))
        modes = tuple(ModeSpec(m.omega, float(gi), m.m_max) for m, gi in zip(self.modes, g))
        return CoupledSystemSpec(self.transmon, modes, self.max_dim, self.transmon_levels)


def ej_at_flux(t: TransmonSpec, flux):
    """E_J0 |cos(pi Phi/Phi0)|, generalised to sqrt(cos^2 + d^2 sin^2) for asymmetry d."""
    x = np.pi * np.asarray(flux, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("flux must be finite")
    if t.asymmetry == 0:
        return t.E_J0 * np.abs(np.cos(x))
    return t.E_J0 * np.sqrt(np.cos(x) ** 2 + t.asymmetry**2 * np.sin(x) ** 2)


def charge_operator(t: TransmonSpec):
    return np.diag(np.arange(-t.n_max, t.n_max + 1, dtype=float))


def transmon_hamiltonian(t: TransmonSpec, flux):
    n = np.arange(-t.n_max, t.n_max + 1, dtype=float)
    ej = float(ej_at_flux(t, flux))
    off = np.full(t.dim - 1, -ej / 2)
    return np.diag(4 * t.E_C * (n - t.n_g) ** 2) + np.diag(off, 1) + np.diag(off, -1)


def transmon_levels(t: TransmonSpec, flux):
    """Eigenvalues (GHz) and eigenvectors of the bare transmon."""
    return linalg.eigh(transmon_hamiltonian(t, flux))


def charge_matrix_element(t: TransmonSpec, flux=0.0, i=0, j=1):
    """|<i|n|j>| between bare transmon eigenstates."""
    _, v = transmon_levels(t, flux)
    return float(abs(v[:, i] @ charge_operator(t) @ v[:, j]))


def _embed(op, k, dims):
    """Sparse operator acting as ``op`` on tensor factor ``k``."""
    out = None
    for i, d in enumerate(dims):
        f = sparse.csr_matrix(op) if i == k else sparse.identity(d, format="csr")
        out = f if out is None else sparse.kron(out, f, format="csr")
    return out


def _annihilation(m_max):
    return np.diag(np.sqrt(np.arange(1, m_max + 1, dtype=float)), 1)


def _transmon_factor(spec: CoupledSystemSpec, flux):
    """Transmon Hamiltonian and charge operator in the basis used by ``spec``."""
    if spec.transmon_levels is None:
        return transmon_hamiltonian(spec.transmon, flux), charge_operator(spec.transmon)
    e, v = transmon_levels(spec.transmon, flux)
    k = spec.transmon_levels
    vk = v[:, :k]
    return np.diag(e[:k]), vk.T @ charge_operator(spec.transmon) @ vk


def build_hamiltonian(spec: CoupledSystemSpec, flux) -> sparse.csr_matrix:
    """Sparse Hermitian Hamiltonian (GHz) at reduced flux Phi/Phi0."""
    dims = spec.dims
    h_t, n_t = _transmon_factor(spec, flux)
    h = _embed(h_t, 0, dims)
    nq = _embed(n_t, 0, dims)
    for k, m in enumerate(spec.modes, start=1):
        a = _annihilation(m.m_max)
        num = np.diag(np.arange(m.m_max + 1, dtype=float) + 0.5)
        h = h + m.f_ghz * _embed(num, k, dims)
        if m.g != 0:
            h = h + m.g_ghz * (nq @ _embed(a + a.T, k, dims))
    return h.tocsr()


def diagonalize(h, n_levels=None):
    """Lowest eigenpairs, sorted ascending.

    Dense for dimension <= DENSE_LIMIT, otherwise shift-invert Lanczos for the
    lowest ``n_levels`` (default SPARSE_LEVELS).
    """
    dim = h.shape[0]
    if dim <= DENSE_LIMIT:
        dense = h.toarray() if sparse.issparse(h) else np.asarray(h)
        w, v = linalg.eigh(dense)
        if n_levels is not None:
            w, v = w[:n_levels], v[:, :n_levels]
        return w, v
    k = min(n_levels or SPARSE_LEVELS, dim - 2)
    # Gershgorin lower bound puts sigma below the whole spectrum
    hc = sparse.csr_matrix(h)
    radius = np.asarray(abs(hc).sum(axis=1)).ravel() - np.abs(hc.diagonal())
    sigma = float(np.min(hc.diagonal() - radius)) - 1.0
    w, v = eigsh(hc, k=k, sigma=sigma, which="LM", v0=np.ones(dim))
    order = np.argsort(w)
    return w[order], v[:, order]


def bare_labels(spec: CoupledSystemSpec, n_transmon=None):
    """Product labels (transmon level, m_1, ..., m_k), one per basis vector of the bare eigenbasis."""
    nt = n_transmon or spec.dims[0]
    ranges = [range(nt)] + [range(m.m_max + 1) for m in spec.modes]
    return list(product(*ranges))


def bare_basis(spec: CoupledSystemSpec, flux, labels):
    """Columns are bare product eigenstates for ``labels``, and their energies (GHz)."""
    e_t, v_t = transmon_levels(spec.transmon, flux)
    if spec.transmon_levels is not None:
        v_t = np.eye(spec.transmon_levels)
    cols, energies = [], []
    for lab in labels:
        vec = v_t[:, lab[0]]
        en = e_t[lab[0]]
        for m, occ in zip(spec.modes, lab[1:]):
            fock = np.zeros(m.m_max + 1)
            fock[occ] = 1.0
            vec = np.kron(vec, fock)
            en += m.f_ghz * (occ + 0.5)
        cols.append(vec)
        energies.append(en)
    return np.array(cols).T, np.array(energies)


def _low_bare_labels(spec, flux, count):
    """The ``count`` lowest-energy bare product labels."""
    nt = min(spec.dims[0], count)
    labels = bare_labels(spec, nt)
    e_t, _ = transmon_levels(spec.transmon, flux)
    en = [e_t[lab[0]] + sum(m.f_ghz * (o + 0.5) for m, o in zip(spec.modes, lab[1:])) for lab in labels]
    order = np.argsort(en, kind="stable")[:count]
    return [labels[i] for i in order]


@dataclass(frozen=True)
class EigenLadder:
    """Dressed levels across a flux sweep.

    ``energies[p, j]`` is the j-th lowest eigenvalue at flux point p;
    ``labels[p, j]`` indexes ``label_names`` (the bare product state that level
    connects to); ``flags[p, j]`` marks levels whose overlap with the previous
    point fell below the tracking threshold.
    """

    flux: np.ndarray
    energies: np.ndarray
    labels: np.ndarray
    flags: np.ndarray
    label_names: tuple = field(default=())

    @property
    def n_levels(self):
        return self.energies.shape[1]

    def level(self, name):
        """Energy trace (GHz) of the level tracked as bare state ``name``; NaN where flagged."""
        idx = self.label_names.index(tuple(name))
        out = np.full(self.flux.size, np.nan)
        for p in range(self.flux.size):
            hit = np.flatnonzero(self.labels[p] == idx)
            if hit.size and not self.flags[p, hit[0]]:
                out[p] = self.energies[p, hit[0]]
        return out

    def transitions(self):
        """Energies relative to the ground level at each point."""
        return self.energies - self.energies[:, :1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["flux", "level", "energy_GHz", "label", "flag"])
        for p, phi in enumerate(self.flux):
            for j in range(self.n_levels):
                lab = "-".join(str(x) for x in self.label_names[self.labels[p, j]])
                w.writerow([f"{phi:.9g}", j, f"{self.energies[p, j]:.12g}", lab, int(self.flags[p, j])])
        return buf.getvalue()


def eigenladder_over_flux(spec: CoupledSystemSpec, flux, n_levels=SPARSE_LEVELS) -> EigenLadder:
    """Diagonalize on each flux point and track levels by eigenvector overlap.

    The first point is labelled by maximal overlap with the bare product
    states; later points by an optimal assignment of overlaps with the
    previous point, so labels are always a permutation. Assignments with
    overlap below TRACK_THRESHOLD are flagged.
    """
    flux = np.asarray(flux, dtype=float)
    if flux.ndim != 1 or flux.size == 0:
        raise DomainError("flux grid must be a nonempty 1-D array")
    if flux.size > 1 and not (np.all(np.diff(flux) > 0) or np.all(np.diff(flux) < 0)):
        raise DomainError("flux grid must be ordered")
    n_levels = min(n_levels, spec.dim)
    names = tuple(_low_bare_labels(spec, flux[0], max(2 * n_levels, n_levels + 8)))

    energies = np.empty((flux.size, n_levels))
    labels = np.empty((flux.size, n_levels), dtype=int)
    flags = np.zeros((flux.size, n_levels), dtype=bool)
    prev_vecs, prev_labels = None, None
    for p, phi in enumerate(flux):
        w, v = diagonalize(build_hamiltonian(spec, phi), n_levels)
        energies[p] = w
        if prev_vecs is None:
            basis, _ = bare_basis(spec, phi, names)
            ov = np.abs(v.T @ basis) ** 2
            rows, cols = linear_sum_assignment(-ov)
            labels[p, rows] = cols
            flags[p, rows] = ov[rows, cols] < TRACK_THRESHOLD
        else:
            ov = np.abs(v.T @ prev_vecs)
            rows, cols = linear_sum_assignment(-ov)
            labels[p, rows] = prev_labels[cols]
            flags[p, rows] = ov[rows, cols] < TRACK_THRESHOLD
        prev_vecs, prev_labels = v, labels[p].copy()
    return EigenLadder(flux=flux, energies=energies, labels=labels, flags=flags, label_names=names)


def transition_frequencies(spec: CoupledSystemSpec, flux, dressed=False):
    """(f_01, f_12, eta) in GHz from bare transmon or tracked dressed levels."""
    if not dressed or not spec.modes:
        e, _ = transmon_levels(spec.transmon, flux)
        f01, f12 = e[1] - e[0], e[2] - e[1]
        return float(f01), float(f12), float(f12 - f01)
    lad = eigenladder_over_flux(spec, [flux])
    zero = (0,) * len(spec.modes)
    try:
        g, e1, e2 = (lad.level((q,) + zero)[0] for q in (0, 1, 2))
    except ValueError as exc:
        raise ResolutionError("transmon level not among the tracked levels") from exc
    if not np.all(np.isfinite([g, e1, e2])):
        raise ResolutionError("transmon levels are strongly hybridised; labels are ambiguous")
    return float(e1 - g), float(e2 - e1), float(e2 - 2 * e1 + g)


def f01_bare(t: TransmonSpec, flux):
    """Bare 0-1 transition (GHz) on an array of flux points."""
    flux = np.atleast_1d(np.asarray(flux, dtype=float))
    out = np.empty(flux.size)
    for i, phi in enumerate(flux):
        e = linalg.eigvalsh(transmon_hamiltonian(t, phi), subset_by_index=[0, 1])
        out[i] = e[1] - e[0]
    return out


def flux_for_f01(t: TransmonSpec, f_ghz, branch=1):
    """Reduced flux in [0, 1/2] where the bare f_01 equals ``f_ghz`` (``branch`` = +1 or -1 for sign)."""
    from scipy.optimize import brentq

    fmax, fmin = f01_bare(t, 0.0)[0], f01_bare(t, 0.5)[0]
    if not fmin < f_ghz < fmax:
        raise DomainError(f"{f_ghz} GHz outside the qubit tuning range ({fmin:.3f}, {fmax:.3f})")
    phi = brentq(lambda x: f01_bare(t, x)[0] - f_ghz, 0.0, 0.5, xtol=1e-14)
    return branch * phi


def spectral_lines(spec: CoupledSystemSpec, flux, n_levels=SPARSE_LEVELS):
    """Transition lines from the ground state: (flux, f_GHz, weight) rows.

    The weight is |<e| sum_i (a_i + a_i^dag) |g>|^2, a proxy for how strongly the
    line shows up in transmission through the modes.
    """
    rows = []
    dims = spec.dims
    x = None
    for k, m in enumerate(spec.modes, start=1):
        a = _annihilation(m.m_max)
        term = _embed(a + a.T, k, dims)
        x = term if x is None else x + term
    for phi in np.atleast_1d(flux):
        w, v = diagonalize(build_hamiltonian(spec, phi), n_levels)
        if x is None:
            amp = np.zeros(w.size)
        else:
            amp = np.abs(v.T @ (x @ v[:, 0])) ** 2
        for j in range(1, w.size):
            rows.append((float(phi), float(w[j] - w[0]), float(amp[j])))
    return np.array(rows).reshape(-1, 3)


def rabi_map(spec: CoupledSystemSpec, flux, f_ghz, linewidth_ghz=0.005, n_levels=SPARSE_LEVELS):
    """Lorentzian-broadened transition weights on a (flux, frequency) grid."""
    f = np.asarray(f_ghz, dtype=float)
    flux = np.atleast_1d(np.asarray(flux, dtype=float))
    lines = spectral_lines(spec, flux, n_levels)
    out = np.zeros((flux.size, f.size))
    hw = linewidth_ghz / 2
    for i, phi in enumerate(flux):
        sel = lines[lines[:, 0] == phi]
        for _, f0, wgt in sel:
            out[i] += wgt * hw**2 / ((f - f0) ** 2 + hw**2)
    return out
