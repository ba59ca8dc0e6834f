"""Free-space tensor, reciprocal rates and the accelerated shift ladder."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arraymirror import (
    AccelParams,
    BlochVector,
    NoConvergence,
    OutOfRange,
    ProbeGeometry,
    ZeroDisplacement,
    delta_k,
    eta,
    free_green,
    gamma_k,
    gamma_k_realspace,
    incidence_bloch,
    make_config,
)
from arraymirror.greens import reciprocal_orders

import oracles

K = 2.0 * math.pi

finite_coord = st.floats(-3.0, 3.0, allow_nan=False)


def test_free_green_frozen_value():
    g = free_green((0.5, 0.0, 0.0))
    assert g[1, 1] == pytest.approx(oracles.FREE_GREEN_YY_HALFWAVE, abs=2e-6)


def test_free_green_rejects_zero_separation():
    with pytest.raises(ZeroDisplacement):
        free_green((0.0, 0.0, 0.0))


def test_free_green_matches_independent_transcription():
    for rvec in [(0.5, 0.0, 0.0), (0.3, -0.2, 0.7), (1.1, 1.1, 0.0)]:
        assert np.allclose(free_green(rvec), oracles._dyadic(rvec), atol=1e-12)


@given(finite_coord, finite_coord, finite_coord)
def test_free_green_symmetric_and_reciprocal(x, y, z):
    if x * x + y * y + z * z < 1e-4:
        return
    g = free_green((x, y, z))
    assert np.allclose(g, g.T, atol=1e-13)
    assert np.allclose(g, free_green((-x, -y, -z)), atol=1e-13)


def test_free_green_self_term_imaginary_limit():
    # Im G_ii -> k/(6 pi) as r -> 0, the radiating part survives the
    # near-field divergence
    g = free_green((1e-5, 0.0, 0.0))
    assert g[1, 1].imag * 6.0 * math.pi / K == pytest.approx(1.0, rel=1e-6)


def test_rate_anchors_all_frozen():
    for label, (d, kx, ky, pol, _r0, _shift, rate) in oracles.FROZEN.items():
        config = make_config(d, pol=pol)
        assert gamma_k(BlochVector(kx, ky), config) == pytest.approx(
            rate, abs=2e-6
        ), label


def test_rate_matches_independent_order_sum():
    rng = np.random.default_rng(8)
    for _ in range(25):
        d = float(rng.uniform(0.08, 0.95))
        kx = float(rng.uniform(-K, K))
        ky = float(rng.uniform(-K, K))
        pol = "x" if rng.integers(2) else "z"
        config = make_config(d, pol=pol)
        mine = gamma_k(BlochVector(kx, ky), config)
        theirs = oracles.audit_rate(d, kx, ky, pol)
        assert mine == pytest.approx(theirs, rel=1e-12, abs=1e-12)


def test_rate_zero_outside_light_cone():
    config = make_config(0.1, pol="x")
    assert gamma_k(BlochVector(1.2 * K, 0.0), config) == 0.0
    assert gamma_k(BlochVector(7.5, 0.0), make_config(0.1, pol="z")) == 0.0


def test_on_cone_order_is_demoted_and_flagged():
    # exactly on the light line the normal wavevector vanishes; the order
    # stops propagating and the anomaly flag carries the information
    config = make_config(0.1, pol="x")
    orders = reciprocal_orders(BlochVector(K, 0.0), config)
    zero = [t for t in orders if t.mx == 0 and t.my == 0][0]
    assert zero.anomaly and not zero.propagating
    assert gamma_k(BlochVector(K, 0.0), config) == 0.0


def test_angle_laws_single_order_regime():
    config_z = make_config(0.1, pol="z")
    config_x = make_config(0.1, pol="x")
    gamma0 = 3.0 * math.pi / (K * K * 0.1 * 0.1)
    for theta in (0.0, 0.15 * math.pi, 0.3 * math.pi, 0.45 * math.pi):
        s, c = math.sin(theta), math.cos(theta)
        kxz = incidence_bloch(ProbeGeometry(theta, "xz", "p"), config_z)
        kyz = incidence_bloch(ProbeGeometry(theta, "yz", "p"), config_z)
        assert gamma_k(kxz, config_z) == pytest.approx(gamma0 * s * s / c, abs=1e-10)
        assert gamma_k(kyz, config_z) == pytest.approx(gamma0 * s * s / c, abs=1e-10)
        assert gamma_k(kxz, config_x) == pytest.approx(gamma0 * c, rel=1e-12)
        assert gamma_k(kyz, config_x) == pytest.approx(gamma0 / c, rel=1e-12)


def test_shift_anchors_at_coarser_spacings():
    # the d >= 0.2 anchors run in about a second total; the d = 0.1 set
    # lives in the acceptance gate where the runtime budget allows it
    for label, (d, kx, ky, pol, r0, shift, _rate) in oracles.FROZEN.items():
        if d < 0.2:
            continue
        config = make_config(d, pol=pol)
        got, err = delta_k(BlochVector(kx, ky), config, AccelParams(base_radius=r0))
        assert got == pytest.approx(shift, abs=5e-6), label
        assert err < 1e-3 * max(abs(shift), 1.0)


def test_shift_anchor_in_plane_center():
    config = make_config(0.1, pol="x")
    got, _ = delta_k(BlochVector(0.0, 0.0), config)
    frozen = oracles.FROZEN["x center d=0.1"][5]
    assert got == pytest.approx(frozen, abs=5e-6)


def test_shift_raises_when_ladder_cannot_settle():
    config = make_config(0.1, pol="x")
    with pytest.raises(NoConvergence):
        delta_k(BlochVector(1.3, 0.7), config, AccelParams(base_radius=8.0, tolerance=1e-12))


def test_realspace_oracle_agrees_at_minimum_cutoff():
    config = make_config(0.3, pol="x")
    kvec = BlochVector(2.0, -1.0)
    rec = gamma_k(kvec, config)
    real = gamma_k_realspace(kvec, config, cutoff=20.0)
    assert abs(rec - real) / max(rec, 1e-3) < 1e-3


def test_realspace_oracle_rejects_short_cutoff():
    with pytest.raises(OutOfRange):
        gamma_k_realspace(BlochVector(0.0, 0.0), make_config(0.1), cutoff=10.0)


def test_mode_point_combines_shift_and_rate(fast_accel):
    config = make_config(0.1, pol="x")
    mp = eta(BlochVector(1.3, 0.7), config, fast_accel)
    assert mp.eta == complex(mp.delta_k, -0.5 * mp.gamma_k)
    assert mp.gamma_k == gamma_k(BlochVector(1.3, 0.7), config)
    assert mp.n_propagating == 1
    assert not mp.anomaly


def test_mode_inversion_symmetry(fast_accel):
    config = make_config(0.1, pol="x")
    a = eta(BlochVector(1.3, 0.7), config, fast_accel)
    b = eta(BlochVector(-1.3, -0.7), config, fast_accel)
    assert a.delta_k == pytest.approx(b.delta_k, abs=1e-9)
    assert a.gamma_k == b.gamma_k


def test_out_of_plane_coordinate_swap_symmetry(fast_accel):
    config = make_config(0.1, pol="z")
    a = eta(BlochVector(0.7, 1.3), config, fast_accel)
    b = eta(BlochVector(1.3, 0.7), config, fast_accel)
    assert a.delta_k == pytest.approx(b.delta_k, abs=1e-9)
    assert a.gamma_k == pytest.approx(b.gamma_k, abs=1e-12)
