"""Polarization-resolved mirror response and diffraction bookkeeping."""

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from arraymirror import (
    DriveField,
    NotDualBand,
    OutOfRange,
    ProbeGeometry,
    SweepTable,
    diffraction_threshold,
    dressed_poles,
    eit_params,
    extract_bands,
    make_config,
    order_contribution_xx,
    rt_spectrum,
    scattering_matrices,
    sp_basis,
    spectra_sweep,
)
from arraymirror.verify import synthetic_mode

K = 2.0 * math.pi

angles = st.floats(0.0, 0.48 * math.pi, allow_nan=False)
planes = st.sampled_from(["xz", "yz"])
pols = st.sampled_from(["x", "z"])
couplings = st.floats(0.0, 40.0, allow_nan=False)
control_detunings = st.floats(-15.0, 15.0, allow_nan=False)
probe_detunings = st.floats(-30.0, 50.0, allow_nan=False)


def _unit(v):
    return math.sqrt(sum(c * c for c in v))


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


@given(angles, planes)
def test_basis_orthonormal_and_transverse(theta, plane):
    basis = sp_basis(ProbeGeometry(theta, plane, "p"))
    u = (1.0, 0.0) if plane == "xz" else (0.0, 1.0)
    for sign, e_p, e_s in [
        (+1.0, basis.e_p_plus, basis.e_s_plus),
        (-1.0, basis.e_p_minus, basis.e_s_minus),
    ]:
        k = (
            math.sin(theta) * u[0],
            math.sin(theta) * u[1],
            sign * math.cos(theta),
        )
        assert _unit(e_p) == pytest.approx(1.0, abs=1e-12)
        assert _unit(e_s) == pytest.approx(1.0, abs=1e-12)
        assert _dot(e_p, e_s) == pytest.approx(0.0, abs=1e-12)
        assert _dot(e_p, k) == pytest.approx(0.0, abs=1e-12)
        assert _dot(e_s, k) == pytest.approx(0.0, abs=1e-12)


def test_basis_normal_incidence_values():
    xz = sp_basis(ProbeGeometry(0.0, "xz", "p"))
    assert xz.e_s_plus == (0.0, -1.0, 0.0)
    assert xz.e_p_plus == (1.0, 0.0, -0.0)
    assert xz.e_p_minus == (-1.0, -0.0, -0.0)
    yz = sp_basis(ProbeGeometry(0.0, "yz", "p"))
    assert yz.e_s_plus == (1.0, -0.0, 0.0)
    assert yz.e_p_plus == (0.0, 1.0, -0.0)


def test_perfect_mirror_on_bare_resonance():
    config = make_config(0.1, gamma_r=0.0, pol="x")
    geo = ProbeGeometry(0.0, "xz", "p")
    mp = synthetic_mode(geo, config, shift=-10.199077)
    res = scattering_matrices(mp.delta_k, geo, DriveField(omega_c=0j, delta_c=0.0), config, modepoint=mp)
    assert abs(res.r_pp - 1.0) < 1e-8
    assert res.t_pp < 1e-8


@given(angles, planes, pols, couplings, control_detunings, probe_detunings)
def test_lossless_array_conserves_energy(theta, plane, pol, omega_c, delta_c, delta_p):
    config = make_config(0.1, gamma_r=0.0, pol=pol)
    geo = ProbeGeometry(theta, plane, "p")
    mp = synthetic_mode(geo, config, shift=-8.0)
    assume(mp.gamma_k > 1e-6)
    drive = DriveField(omega_c=complex(omega_c), delta_c=delta_c)
    poles = dressed_poles(eit_params(mp, drive, config))
    assume(abs(delta_p - poles.plus) > 1e-6 and abs(delta_p - poles.minus) > 1e-6)
    res = scattering_matrices(delta_p, geo, drive, config, modepoint=mp)
    assert res.column_sum("p") == pytest.approx(1.0, abs=1e-10)
    assert res.column_sum("s") == pytest.approx(1.0, abs=1e-10)


@given(angles, planes, pols, couplings, control_detunings, probe_detunings)
def test_storage_decay_only_removes_energy(theta, plane, pol, omega_c, delta_c, delta_p):
    config = make_config(0.1, gamma_r=0.3, pol=pol)
    geo = ProbeGeometry(theta, plane, "p")
    mp = synthetic_mode(geo, config, shift=-8.0)
    assume(mp.gamma_k > 1e-6)
    drive = DriveField(omega_c=complex(omega_c), delta_c=delta_c)
    res = scattering_matrices(delta_p, geo, drive, config, modepoint=mp)
    for col in ("p", "s"):
        total = res.column_sum(col)
        assert total <= 1.0 + 1e-12
        assert res.nonspecular_loss(col) == pytest.approx(1.0 - total, abs=1e-14)


@pytest.mark.parametrize(
    "pol,plane,active",
    [("z", "xz", "pp"), ("z", "yz", "pp"), ("x", "xz", "pp"), ("x", "yz", "ss")],
)
def test_polarization_selectivity_is_exact(pol, plane, active):
    config = make_config(0.1, gamma_r=0.3, pol=pol)
    geo = ProbeGeometry(0.3, plane, "p")
    mp = synthetic_mode(geo, config, shift=-8.0)
    res = scattering_matrices(1.0, geo, DriveField(omega_c=complex(10.0), delta_c=0.0), config, modepoint=mp)
    channels = {"pp": res.r_pp, "ps": res.r_ps, "sp": res.r_sp, "ss": res.r_ss}
    for name, value in channels.items():
        if name == active:
            assert value > 0.0
        else:
            assert value == 0.0


def test_spectrum_table_layout_and_meta():
    config = make_config(0.1, gamma_r=0.3, pol="z")
    geo = ProbeGeometry(0.25 * math.pi, "xz", "p")
    mp = synthetic_mode(geo, config, shift=30.0)
    tab = rt_spectrum(np.linspace(-5.0, 5.0, 11), geo, DriveField(omega_c=complex(15.0), delta_c=0.0), config, modepoint=mp)
    assert list(tab.columns) == [
        "delta_p", "R_pp", "R_ps", "R_sp", "R_ss",
        "T_pp", "T_ps", "T_sp", "T_ss", "sum_RT", "nonspecular_loss", "flags",
    ]
    assert tab.meta["mode_delta_k"] == 30.0
    assert tab.meta["mode_gamma_k"] == pytest.approx(mp.gamma_k)
    assert tab.n_rows == 11


def test_spectrum_marks_pole_rows_not_crashes():
    # a dark mode at normal incidence has a real pole; the grid row that
    # lands on it carries NaN and a flag instead of raising
    config = make_config(0.1, gamma_r=0.0, pol="z")
    geo = ProbeGeometry(0.0, "xz", "p")
    mp = synthetic_mode(geo, config, shift=5.0)
    assert mp.gamma_k == 0.0
    tab = rt_spectrum(np.array([4.0, 5.0, 6.0]), geo, DriveField(omega_c=0j, delta_c=0.0), config, modepoint=mp)
    assert tab.columns["flags"][1] == "on-pole"
    assert math.isnan(tab.columns["R_pp"][1])
    assert tab.columns["R_pp"][0] == 0.0 and tab.columns["T_pp"][0] == 1.0


def test_sweep_orders_rows_major_and_stamps_axes():
    config = make_config(0.1, gamma_r=0.3, pol="z")
    geo = ProbeGeometry(0.25 * math.pi, "xz", "p")
    dp = np.linspace(-5.0, 5.0, 2)
    sw = spectra_sweep(
        {"omega_c": [5.0, 10.0], "delta_c": [-1.0, 0.0, 1.0]},
        dp, geo, DriveField(omega_c=0j, delta_c=0.0), config,
    )
    assert sw.n_rows == 12
    assert sw.columns["omega_c"][:6] == [5.0] * 6
    assert sw.columns["delta_c"][:6] == [-1.0, -1.0, 0.0, 0.0, 1.0, 1.0]
    assert list(sw.columns)[:2] == ["omega_c", "delta_c"]


def test_sweep_rejects_unknown_axis():
    config = make_config(0.1, pol="z")
    geo = ProbeGeometry(0.0, "xz", "p")
    with pytest.raises(OutOfRange):
        spectra_sweep({"bogus": [1.0]}, np.array([0.0, 1.0]), geo, DriveField(omega_c=0j, delta_c=0.0), config)


def test_extract_bands_on_hand_built_lorentzians():
    grid = np.linspace(-30.0, 30.0, 6001)

    def lor(x, c, w):
        return 0.9 / (1.0 + ((x - c) / (0.5 * w)) ** 2)

    r = lor(grid, -6.0, 2.0) + lor(grid, 9.0, 8.0)
    tab = SweepTable(columns={"delta_p": list(grid), "R_pp": list(r)}, meta={})
    narrow, broad = extract_bands(tab)
    assert narrow.label == "narrow" and broad.label == "broad"
    assert narrow.center == pytest.approx(-6.0, abs=0.02)
    assert broad.center == pytest.approx(9.0, abs=0.02)
    # tails overlap, so widths come out a few percent above nominal
    assert narrow.fwhm == pytest.approx(2.0, rel=0.1)
    assert broad.fwhm == pytest.approx(8.0, rel=0.1)
    assert narrow.fwhm < broad.fwhm


def test_single_resonance_is_not_dual_band():
    config = make_config(0.1, gamma_r=0.3, pol="z")
    geo = ProbeGeometry(0.25 * math.pi, "xz", "p")
    mp = synthetic_mode(geo, config, shift=30.0)
    tab = rt_spectrum(np.linspace(-10.0, 70.0, 801), geo, DriveField(omega_c=0j, delta_c=0.0), config, modepoint=mp)
    with pytest.raises(NotDualBand):
        extract_bands(tab)


@given(
    st.floats(5.0, 30.0, allow_nan=False),
    st.floats(-15.0, 15.0, allow_nan=False),
    st.floats(0.0, math.pi / 3.0, allow_nan=False),
)
def test_in_plane_grazing_plane_mirror_is_dual_band(omega_c, delta_c, theta):
    """s-polarized response of the in-plane dipole tilted in the other plane.

    This orientation keeps a bright, single-order mode across the whole
    coupling and detuning box, so the dressed splitting always shows up
    as exactly two reflection bands around the transparency point.
    """
    config = make_config(0.1, gamma_r=0.3, pol="x")
    geo = ProbeGeometry(theta, "yz", "s")
    mp = synthetic_mode(geo, config, shift=-10.2)
    drive = DriveField(omega_c=complex(omega_c), delta_c=delta_c)
    half = abs(delta_c) + 2.0 * omega_c + 2.0 * mp.gamma_k + 20.0
    tab = rt_spectrum(np.linspace(-half, half, 4001), geo, drive, config, modepoint=mp)
    narrow, broad = extract_bands(tab, column="R_ss")
    assert narrow.fwhm <= broad.fwhm
    assert narrow.peak > 0.5 and broad.peak > 0.5
    # the two bands bracket the transparency point at minus the control detuning
    assert (narrow.center + delta_c) * (broad.center + delta_c) < 0


def test_diffraction_threshold_values():
    sixth = math.pi / 6.0
    t = diffraction_threshold(ProbeGeometry(sixth, "yz", "p"))
    assert t.d_star == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert t.order == (0, 1)
    t = diffraction_threshold(ProbeGeometry(sixth, "xz", "p"))
    assert t.order == (1, 0)
    assert diffraction_threshold(ProbeGeometry(0.0, "xz", "p")).d_star == pytest.approx(1.0)
    t = diffraction_threshold(ProbeGeometry(0.25 * math.pi, "xz", "p"))
    assert t.d_star == pytest.approx(1.0 / (1.0 + math.sin(0.25 * math.pi)), rel=1e-12)


def test_order_contribution_across_the_threshold():
    theta = 0.25 * math.pi
    d_star = 1.0 / (1.0 + math.sin(theta))
    at = order_contribution_xx(d_star, theta)
    assert at.value == 0j and at.anomaly

    below = order_contribution_xx(0.9 * d_star, theta)
    assert below.value.imag == 0.0 and below.value.real < 0.0 and not below.anomaly

    above = order_contribution_xx(1.05 * d_star, theta)
    assert above.value.imag > 0.0 and above.value.real == 0.0

    # the contribution switches on smoothly: it shrinks approaching the
    # threshold from either side
    closer = order_contribution_xx(0.98 * d_star, theta)
    assert abs(closer.value) < abs(below.value)
    assert abs(order_contribution_xx(1.02 * d_star, theta).value) < abs(above.value)


def test_order_contribution_validates_inputs():
    with pytest.raises(OutOfRange):
        order_contribution_xx(1.0, 0.1)
    with pytest.raises(OutOfRange):
        order_contribution_xx(0.5, 1.6)
