from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lhcqed.errors import DomainError, SingularityError
from lhcqed.hamiltonian import CoupledSystemSpec, TransmonSpec, flux_for_f01, transition_frequencies
from lhcqed.stark import (
    SINGULAR_FRACTION,
    StarkScenario,
    chi,
    fit_power_calibration,
    mean_photons,
    stark_map,
    stark_shift,
)

GHZ = 2 * np.pi * 1e9
MHZ = 2 * np.pi * 1e6
KHZ = 2 * np.pi * 1e3


def scenario(delta_mhz=300.0, eta_mhz=-310.0, g_mhz=10.0, kappa_mhz=1.0, drive_offset_mhz=0.0, omega=MHZ):
    w_i = GHZ * 6.0
    return StarkScenario(
        omega_q=w_i + MHZ * delta_mhz,
        eta=MHZ * eta_mhz,
        omega_i=w_i,
        kappa_i=MHZ * kappa_mhz,
        g_i=MHZ * g_mhz,
        omega_d=w_i + MHZ * drive_offset_mhz,
        Omega=omega,
    )


def eta_at(f_ghz):
    t = TransmonSpec(0.31, 37.0)
    return transition_frequencies(CoupledSystemSpec(t), flux_for_f01(t, f_ghz))[2]


# ------------------------------------------------------------------- chi


def test_chi_example():
    assert chi(scenario()) / MHZ == pytest.approx(0.1694, abs=1e-4)


def test_chi_vanishes_without_coupling():
    assert chi(scenario(g_mhz=0.0)) == 0.0


def test_chi_sign_flips_across_resonance():
    assert chi(scenario(delta_mhz=100.0)) > 0
    assert chi(scenario(delta_mhz=-100.0)) < 0


def test_standard_formula():
    s = scenario()
    d, eta, g = s.delta, s.eta, s.g_i
    assert chi(s, "standard") == pytest.approx(g**2 * eta / (d * (d + eta)))
    with pytest.raises(ValueError):
        chi(s, "other")


@pytest.mark.parametrize(
    "delta,formula,boundary",
    [(0.0, "reported", "delta=0"), (-310.0, "reported", "delta=eta"), (310.0, "standard", "delta=-eta"),
     (0.0, "standard", "delta=0")],
)
def test_singularities_name_boundary(delta, formula, boundary):
    with pytest.raises(SingularityError) as e:
        chi(scenario(delta_mhz=delta), formula)
    assert e.value.boundary == boundary


def test_singularity_band_edge():
    eta = MHZ * 310.0
    inside = scenario(delta_mhz=0.5 * SINGULAR_FRACTION * 310.0)
    outside = scenario(delta_mhz=2 * SINGULAR_FRACTION * 310.0)
    with pytest.raises(SingularityError):
        chi(inside)
    assert np.isfinite(chi(outside))
    assert abs(outside.delta) < 1e-5 * eta


def test_other_pole_is_finite_under_each_formula():
    assert np.isfinite(chi(scenario(delta_mhz=310.0), "reported"))
    assert np.isfinite(chi(scenario(delta_mhz=-310.0), "standard"))


def test_validation():
    with pytest.raises(DomainError):
        scenario(kappa_mhz=0.0)
    with pytest.raises(DomainError):
        scenario(eta_mhz=0.0)


# --------------------------------------------------------------- photons


def test_no_drive_no_photons():
    s = scenario(omega=0.0)
    assert mean_photons(s) == 0.0
    assert stark_shift(s) == 0.0


def test_on_resonance_photon_number():
    s = scenario(kappa_mhz=2.0, omega=MHZ)
    assert mean_photons(s) == 1.0
    s = scenario(kappa_mhz=0.7, omega=MHZ * 3.1)
    assert mean_photons(s) == 4 * s.Omega**2 / s.kappa_i**2


def test_half_width_detuning():
    on = mean_photons(scenario(kappa_mhz=2.0))
    off = mean_photons(scenario(kappa_mhz=2.0, drive_offset_mhz=1.0))
    assert off == pytest.approx(on / 2, rel=1e-12)


@given(st.floats(0.0, 1e3), st.floats(-20.0, 20.0))
def test_shift_linear_in_power(p, offset):
    base = scenario(drive_offset_mhz=offset, omega=MHZ)
    scaled = replace(base, Omega=MHZ * np.sqrt(p))
    assert stark_shift(scaled) == pytest.approx(p * stark_shift(base), rel=1e-12, abs=1e-12)


# ------------------------------------------------------------------- maps


def test_power_map_is_linear():
    p = np.linspace(0, 10, 21)
    m = stark_map(scenario(), "power", p, calibration=MHZ**2)
    coef = np.polyfit(p, m.shift, 1)
    resid = m.shift - np.polyval(coef, p)
    assert np.max(np.abs(resid)) < 1e-9 * np.max(np.abs(m.shift))
    np.testing.assert_allclose(m.qubit_line - scenario().omega_q, m.shift)


def test_frequency_map_envelope():
    s = scenario(kappa_mhz=2.0)
    wd = s.omega_i + MHZ * np.linspace(-10, 10, 201)
    m = stark_map(s, "frequency", wd)
    assert int(np.argmax(np.abs(m.shift))) == 100
    np.testing.assert_allclose(m.shift, m.shift[::-1], rtol=1e-12)


def test_far_detuned_shift_is_negligible():
    s = scenario(kappa_mhz=1.0, drive_offset_mhz=500.0, omega=MHZ)
    assert abs(stark_shift(s)) < KHZ


def test_map_validation():
    with pytest.raises(DomainError):
        stark_map(scenario(), "power", [-1.0])
    with pytest.raises(ValueError):
        stark_map(scenario(), "time", [1.0])


def test_spectroscopy_peaks_on_line():
    m = stark_map(scenario(), "power", [0.0, 5.0], calibration=MHZ**2)
    f = np.linspace(6.29, 6.31, 2001)
    img = m.spectroscopy(f)
    for row, line in zip(img, m.qubit_line):
        assert abs(f[np.argmax(row)] - line / GHZ) <= f[1] - f[0]


def test_map_csv():
    m = stark_map(scenario(), "power", [0.0, 1.0], calibration=MHZ**2)
    lines = m.to_csv().splitlines()
    assert lines[0] == "sweep_value,qubit_line_GHz,nbar,chi_MHz"
    assert float(lines[2].split(",")[3]) == pytest.approx(0.1694, abs=1e-4)


def test_calibration_round_trip():
    s = scenario(drive_offset_mhz=0.3)
    k = 2.7 * MHZ**2
    p = np.linspace(0.1, 5, 12)
    shifts = stark_map(s, "power", p, calibration=k).shift
    assert fit_power_calibration(p, shifts, s) == pytest.approx(k, rel=1e-12)
    with pytest.raises(DomainError):
        fit_power_calibration([0.0], [0.0], s)


# ---------------------------------------------------------- device cases


def device_case(f_mode):
    return StarkScenario(
        omega_q=GHZ * 6.275,
        eta=GHZ * eta_at(6.275),
        omega_i=GHZ * f_mode,
        kappa_i=MHZ * 1.0,
        g_i=MHZ * 15.0,
        omega_d=GHZ * f_mode,
        Omega=MHZ,
    )


def test_straddling_case():
    assert device_case(6.003).straddling()
    assert not device_case(6.588).straddling()


def test_opposite_signs_for_the_two_driven_modes():
    assert np.sign(chi(device_case(6.003))) != np.sign(chi(device_case(6.588)))
    assert np.sign(stark_shift(device_case(6.003))) != np.sign(stark_shift(device_case(6.588)))
