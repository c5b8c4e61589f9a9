import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lhcqed.errors import DomainError, NumericError
from lhcqed.metamaterial import LhtlCell
from lhcqed.network import (
    FrequencyGrid,
    TLineSegment,
    TwoPort,
    abcd_to_s21,
    capacitor_impedance,
    cascade,
    inductor_impedance,
    line_input_impedance,
    one_port_input_impedance,
    series,
    shunt,
    tline_abcd,
)
from oracles import mna_s21

W = 2 * np.pi * np.linspace(1.0, 20.0, 97) * 1e9


@pytest.mark.parametrize("n_cells", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("lossy", [False, True])
def test_cascade_matches_nodal_analysis(n_cells, lossy):
    cell = LhtlCell(C_l=250e-15, L_l=0.7e-9, L_r=0.05e-9, C_r=20e-15, capacitor_q=1e3 if lossy else None)
    c_in, c_out = 30e-15, 25e-15
    chain = cascade(
        [series(capacitor_impedance(c_in))] + [cell.twoport(W)] * n_cells + [series(capacitor_impedance(c_out))], W
    )
    s_abcd = abcd_to_s21(chain, 50.0)
    s_mna = mna_s21(W, 50.0, c_in, c_out, cell, n_cells)
    np.testing.assert_allclose(s_abcd, s_mna, rtol=1e-9)


def test_cascade_with_line_matches_nodal_analysis():
    cell = LhtlCell(C_l=250e-15, L_l=0.7e-9, L_r=0.05e-9, C_r=20e-15)
    seg = TLineSegment(z0=50.0, length=4.9e-3, eps_eff=7.6, alpha=0.3)
    chain = cascade(
        [series(capacitor_impedance(30e-15))] + [cell.twoport(W)] * 3 + [seg, series(capacitor_impedance(25e-15))], W
    )
    np.testing.assert_allclose(abcd_to_s21(chain), mna_s21(W, 50.0, 30e-15, 25e-15, cell, 3, seg), rtol=1e-9)


# ------------------------------------------------------- closed-form checks


def test_identity_transmits_fully():
    np.testing.assert_allclose(abcd_to_s21(TwoPort.identity(5)), 1.0)


@given(st.floats(1.0, 1e4), st.floats(-1e4, 1e4))
def test_series_impedance_s21(r, x):
    z = complex(r, x)
    s = abcd_to_s21(cascade([series(z)], W[:3]))
    np.testing.assert_allclose(s, 100 / (100 + z), rtol=1e-12)


@given(st.floats(1e-4, 1.0), st.floats(-1.0, 1.0))
def test_shunt_admittance_s21(g, b):
    y = complex(g, b)
    s = abcd_to_s21(cascade([shunt(y)], W[:3]))
    np.testing.assert_allclose(s, 2 / (2 + 50 * y), rtol=1e-12)


def test_unequal_terminations():
    # a matched quarter-wave transformer between 50 and 200 ohm
    f0 = 5e9
    seg = TLineSegment(z0=100.0, length=299792458 / f0 / 4, eps_eff=1.0)
    s = abcd_to_s21(tline_abcd(seg, 2 * np.pi * np.array([f0])), r0=50.0, rl=200.0)
    assert abs(s[0]) == pytest.approx(1.0, abs=1e-12)


def test_lossless_line_phase():
    seg = TLineSegment(z0=50.0, length=0.01, eps_eff=4.0)
    s = abcd_to_s21(tline_abcd(seg, W))
    np.testing.assert_allclose(np.abs(s), 1.0, atol=1e-12)
    np.testing.assert_allclose(np.exp(-1j * seg.beta(W) * seg.length), s, atol=1e-12)


def test_attenuation_from_internal_q():
    seg = TLineSegment(z0=50.0, length=0.01, eps_eff=4.0, q_internal=1e3)
    np.testing.assert_allclose(seg.gamma(W).real, seg.beta(W) / 2e3)


def test_quarter_wave_shorted_stub_is_open():
    eps = 7.6
    f0 = 6e9
    seg = TLineSegment(z0=50.0, length=299792458 / np.sqrt(eps) / f0 / 4, eps_eff=eps)
    z = line_input_impedance(seg, 2 * np.pi * np.array([f0]), 0.0)
    assert abs(z[0]) > 1e12


@given(st.floats(1.0, 500.0), st.floats(-500.0, 500.0))
def test_line_input_impedance_matches_chain(r, x):
    seg = TLineSegment(z0=50.0, length=3e-3, eps_eff=7.6, alpha=0.5)
    zl = complex(r, x)
    np.testing.assert_allclose(
        line_input_impedance(seg, W, zl), one_port_input_impedance(tline_abcd(seg, W), zl), rtol=1e-9
    )


# ---------------------------------------------------------------- properties


passive_element = st.one_of(
    st.builds(lambda c: series(capacitor_impedance(c * 1e-15)), st.floats(1.0, 1000.0)),
    st.builds(lambda c: shunt(lambda w, c=c: 1j * w * c * 1e-15), st.floats(1.0, 1000.0)),
    st.builds(lambda l: series(inductor_impedance(l * 1e-9)), st.floats(0.01, 10.0)),
    st.builds(lambda l: shunt(lambda w, l=l: 1 / (1j * w * l * 1e-9)), st.floats(0.01, 10.0)),
    st.builds(lambda r: series(r), st.floats(0.0, 100.0)),
    st.builds(
        lambda z, l, a: TLineSegment(z0=z, length=l * 1e-3, eps_eff=7.6, alpha=a),
        st.floats(10.0, 200.0),
        st.floats(0.01, 10.0),
        st.floats(0.0, 5.0),
    ),
)


@given(st.lists(passive_element, min_size=1, max_size=8))
def test_reciprocal_and_passive(elements):
    chain = cascade(elements, W)
    scale = np.abs(chain.A * chain.D) + np.abs(chain.B * chain.C)
    assert np.all(np.abs(chain.determinant() - 1) <= 1e-12 * scale + 1e-12)
    assert np.all(np.abs(abcd_to_s21(chain)) <= 1 + 1e-9)


@given(st.lists(passive_element, min_size=3, max_size=6))
def test_cascade_is_associative(elements):
    a, b, c = cascade(elements[:1], W), cascade(elements[1:2], W), cascade(elements[2:], W)
    np.testing.assert_allclose(((a @ b) @ c).abcd, (a @ (b @ c)).abcd, rtol=1e-9, atol=1e-12)


@given(st.lists(passive_element, min_size=1, max_size=6))
def test_reversal_preserves_transmission(elements):
    chain = cascade(elements, W)
    np.testing.assert_allclose(abcd_to_s21(chain.reversed()), abcd_to_s21(chain), rtol=1e-9)


# -------------------------------------------------------------------- errors


@pytest.mark.parametrize("bad", [[], [1.0, 1.0], [2.0, 1.0], [-1.0, 1.0], [np.nan], [[1.0, 2.0]]])
def test_grid_validation(bad):
    with pytest.raises(DomainError):
        FrequencyGrid(np.array(bad, dtype=float))


def test_grid_from_ghz():
    g = FrequencyGrid.from_ghz(4, 10, 7)
    np.testing.assert_allclose(g.f_ghz, np.arange(4, 11))
    assert len(g) == 7


@pytest.mark.parametrize(
    "kwargs",
    [dict(z0=0.0, length=1.0, eps_eff=1.0), dict(z0=50.0, length=-1.0, eps_eff=1.0),
     dict(z0=50.0, length=1.0, eps_eff=0.0), dict(z0=50.0, length=1.0, eps_eff=1.0, alpha=-1.0)],
)
def test_segment_validation(kwargs):
    with pytest.raises(DomainError):
        TLineSegment(**kwargs)


def test_nonpositive_termination_rejected():
    with pytest.raises(DomainError):
        abcd_to_s21(TwoPort.identity(2), r0=0.0)


def test_vanishing_denominator_raises():
    m = np.zeros((1, 2, 2), dtype=complex)
    with pytest.raises(NumericError):
        abcd_to_s21(TwoPort(m))


def test_nonfinite_element_rejected():
    with pytest.raises(DomainError):
        cascade([series(np.inf)], W[:2])


def test_cascade_needs_items():
    with pytest.raises(DomainError):
        cascade([], W)
