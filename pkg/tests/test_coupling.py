import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lhcqed.coupling import (
    CouplingRecord,
    CouplingSet,
    QubitCircuit,
    SplittingObservation,
    circuit_splitting,
    crossing_flux_window,
    extract_g_semiclassical,
    fit_g_quantum,
    fit_global_ej0,
    halfsplit_factor,
    quantum_objective,
    residue_couplings,
    superstrong_ratio,
    synthesize_splitting,
)
from lhcqed.errors import DomainError, FitError, ResolutionError
from lhcqed.hamiltonian import ModeSpec, TransmonSpec, f01_bare
from lhcqed.metamaterial import build_hybrid_network, spectrum
from lhcqed.modes import ModeCatalog, ModeRecord, catalog
from lhcqed.network import FrequencyGrid

GHZ = 2 * np.pi * 1e9
MHZ = 2 * np.pi * 1e6
T = TransmonSpec(E_C=0.31, E_J0=37.0)


# ------------------------------------------------------------ global E_J0


def crossings(flux):
    return [(phi, GHZ * f) for phi, f in zip(flux, f01_bare(T, flux))]


def test_ej0_round_trip():
    pts = crossings(np.linspace(0.05, 0.35, 8))
    assert fit_global_ej0(pts, 0.31) == pytest.approx(37.0, rel=5e-3)


def test_ej0_single_point_is_exact():
    pts = crossings([0.2])
    assert fit_global_ej0(pts, 0.31) == pytest.approx(37.0, rel=1e-9)


def test_ej0_with_noise():
    rng = np.random.default_rng(11)
    flux = np.linspace(0.05, 0.35, 8)
    clean = f01_bare(T, flux)
    for _ in range(20):
        noisy = clean + rng.uniform(-5e-3, 5e-3, clean.size)
        pts = [(phi, GHZ * f) for phi, f in zip(flux, noisy)]
        assert fit_global_ej0(pts, 0.31) == pytest.approx(37.0, rel=0.02)


def test_ej0_degenerate_inputs():
    with pytest.raises(FitError):
        fit_global_ej0([], 0.31)
    with pytest.raises(FitError):
        fit_global_ej0([(0.2, GHZ * 8.0), (0.2, GHZ * 8.1)], 0.31)


# ------------------------------------------------------------ quantum fit


def splitting(g_mhz, half_width=0.1, extra_modes=()):
    modes = [ModeSpec(GHZ * 7.8, MHZ * g_mhz)] + list(extra_modes)
    flux = crossing_flux_window(T, GHZ * 7.8, half_width, 41)
    return synthesize_splitting(T, modes, 0, flux)


def test_round_trip_22_mhz():
    rec = fit_g_quantum(splitting(22.0), T)
    assert rec.g_prefactor == pytest.approx(MHZ * 22.0, rel=0.01)
    assert rec.g_halfsplit == pytest.approx(rec.g_prefactor * halfsplit_factor(T, GHZ * 7.8))
    assert rec.method == "quantum-fit"


@settings(max_examples=6, deadline=None)
@given(st.floats(1.0, 300.0))
def test_round_trip_any_coupling(g_mhz):
    obs = splitting(g_mhz, half_width=max(0.1, 4e-3 * g_mhz))
    assert fit_g_quantum(obs, T).g_prefactor == pytest.approx(MHZ * g_mhz, rel=0.01)


def test_zero_coupling():
    rec = fit_g_quantum(splitting(0.0), T)
    assert rec.g_prefactor < MHZ * 0.01


def test_objective_is_convex_at_optimum():
    obs = splitting(22.0)
    g = fit_g_quantum(obs, T).g_prefactor
    best = quantum_objective(obs, T, g)
    assert quantum_objective(obs, T, 0.8 * g) > best
    assert quantum_objective(obs, T, 1.2 * g) > best


@pytest.mark.parametrize("g_mhz", [5.0, 22.0])
def test_neighbour_mode_changes_fit_by_less_than_5_percent(g_mhz):
    neighbour = ModeSpec(GHZ * 8.05, MHZ * g_mhz)
    obs = splitting(g_mhz, half_width=0.06, extra_modes=[neighbour])
    assert fit_g_quantum(obs, T).g_prefactor == pytest.approx(MHZ * g_mhz, rel=0.05)


def test_noisy_observation_is_ordered():
    modes = [ModeSpec(GHZ * 7.8, MHZ * 22)]
    obs = synthesize_splitting(T, modes, 0, crossing_flux_window(T, GHZ * 7.8, 0.1), noise_ghz=1e-3, rng=3)
    assert np.all(obs.lower <= obs.upper)
    assert fit_g_quantum(obs, T).g_prefactor == pytest.approx(MHZ * 22, rel=0.1)


def test_observation_validation():
    with pytest.raises(DomainError):
        SplittingObservation(np.array([0.1, 0.2]), np.array([1.0]), np.array([2.0]), 0, GHZ)
    with pytest.raises(DomainError):
        SplittingObservation(np.array([0.2, 0.1]), np.array([1.0, 1.0]), np.array([2.0, 2.0]), 0, GHZ)
    with pytest.raises(DomainError):
        SplittingObservation(np.array([0.1]), np.array([2.0]), np.array([1.0]), 0, GHZ)


def test_record_and_set_invariants():
    with pytest.raises(DomainError):
        CouplingRecord(0, GHZ, -1.0, -1.0, "x")
    with pytest.raises(DomainError):
        CouplingRecord(0, GHZ, 1.0, 1.0, "x", residual=np.inf)
    s = CouplingSet((CouplingRecord(0, GHZ * 7.8, MHZ * 15, MHZ * 20, "residue"),))
    assert s.g("prefactor")[0] == pytest.approx(MHZ * 15)
    assert s.g()[0] == pytest.approx(MHZ * 20)
    lines = s.to_csv().splitlines()
    assert lines[0] == "mode_index,f_GHz,g_MHz_prefactor,g_MHz_halfsplit,method,residual"
    assert lines[1].startswith("0,7.800000000,15.000000,20.000000,residue")


# -------------------------------------------------------- superstrong ratio


def test_uniform_catalog_ratio():
    cat = ModeCatalog(tuple(ModeRecord(GHZ * 7 + MHZ * 100 * i, 1e6, 1.0) for i in range(5)))
    r = superstrong_ratio(np.full(5, MHZ * 50), cat)
    assert r[:-1] == [pytest.approx(0.5)] * 4
    assert r[-1] is None
    with pytest.raises(DomainError):
        superstrong_ratio(np.ones(3), cat)


# ---------------------------------------------------------- circuit model


@pytest.fixture(scope="module")
def ref_catalog(device):
    return catalog(spectrum(device.resonator_spec(), FrequencyGrid.from_ghz(5.8, 9.6, 200001)))


@pytest.fixture(scope="module")
def ref_residues(device, ref_catalog):
    cat = ref_catalog.below(GHZ * 9.3)
    w = np.linspace(cat.omegas[0] * 0.995, cat.omegas[-1] * 1.005, 200001)
    net = build_hybrid_network(device.resonator_spec(), w)
    return residue_couplings(net, QubitCircuit.from_device(device, with_readout=False), T)


def test_qubit_circuit_resonance(device):
    q = QubitCircuit.from_device(device, with_readout=False)
    wq = GHZ * 8.0
    # with the probe node grounded the island resonates at the bare frequency
    y = q.island_admittance(np.array([wq]), wq) + 1j * wq * q.C_QM
    assert abs(y[0]) < 1e-12 * wq * q.c_sigma
    assert q.c_sigma == pytest.approx(device.c_sigma)


@pytest.mark.parametrize("f_mode", [6.7512, 7.8129, 8.3182])
def test_quantum_and_semiclassical_agree(device, ref_catalog, f_mode):
    spec = device.resonator_spec()
    q = QubitCircuit.from_device(device, with_readout=False)
    wm = ref_catalog.omegas[ref_catalog.nearest(GHZ * f_mode)]
    semi = extract_g_semiclassical(spec, q, wm, half_window=GHZ * 0.1, transmon=T)
    obs = circuit_splitting(spec, q, T, wm, GHZ * 0.1)
    quantum = fit_g_quantum(obs, T)
    assert quantum.g_halfsplit == pytest.approx(semi.g_halfsplit, rel=0.10)


def test_residue_matches_splitting(device, ref_catalog, ref_residues):
    spec = device.resonator_spec()
    q = QubitCircuit.from_device(device, with_readout=False)
    res_w = np.array([r.omega for r in ref_residues])
    for f in (7.3928, 7.8129, 8.3182, 8.9346):
        wm = ref_catalog.omegas[ref_catalog.nearest(GHZ * f)]
        semi = extract_g_semiclassical(spec, q, wm, half_window=GHZ * 0.1)
        res = ref_residues[int(np.argmin(np.abs(res_w - wm)))]
        assert res.omega == pytest.approx(wm, rel=1e-4)
        assert res.g_halfsplit == pytest.approx(semi.g_halfsplit, rel=0.05)


def test_residue_finds_every_catalog_mode(ref_catalog, ref_residues):
    cat = ref_catalog.below(GHZ * 9.3)
    assert len(ref_residues) == len(cat)
    np.testing.assert_allclose([r.omega for r in ref_residues], cat.omegas, rtol=1e-4)


def test_reference_device_is_not_superstrong(ref_residues):
    w = np.array([r.omega for r in ref_residues])
    g = np.array([r.g_halfsplit for r in ref_residues])
    r = superstrong_ratio(g, w)
    assert max(x for x in r if x is not None) < 1
    assert max(x for x in superstrong_ratio(np.array([x.g_prefactor for x in ref_residues]), w) if x) < 1


def test_reference_coupling_scale(ref_residues):
    g = np.array([r.g_halfsplit for r in ref_residues]) / MHZ
    w = np.array([r.omega for r in ref_residues]) / GHZ
    near = g[np.argmin(np.abs(w - 7.8))]
    assert 22 / 1.5 <= near <= 22 * 1.5


@pytest.mark.xfail(strict=True, reason="model g keeps rising toward 9.25 GHz; see the decisions ledger")
def test_reference_coupling_peaks_near_7_8_ghz(ref_residues):
    g = np.array([r.g_halfsplit for r in ref_residues])
    w = np.array([r.omega for r in ref_residues]) / GHZ
    assert 7.3 <= w[int(np.argmax(g))] <= 8.3


def test_coarse_grid_is_a_resolution_error(device, ref_catalog):
    q = QubitCircuit.from_device(device, with_readout=False)
    wm = ref_catalog.omegas[ref_catalog.nearest(GHZ * 7.8129)]
    with pytest.raises(ResolutionError):
        extract_g_semiclassical(device.resonator_spec(), q, wm, half_window=GHZ * 0.1, points=9)


def test_decoupled_qubit_has_tiny_coupling(device, ref_catalog):
    from dataclasses import replace

    q = replace(QubitCircuit.from_device(device, with_readout=False), C_QM=1e-18)
    wm = ref_catalog.omegas[ref_catalog.nearest(GHZ * 7.8129)]
    net = build_hybrid_network(device.resonator_spec(), np.linspace(wm - GHZ * 0.05, wm + GHZ * 0.05, 20001))
    recs = residue_couplings(net, q)
    assert len(recs) == 1
    assert recs[0].g_halfsplit < MHZ * 0.01
