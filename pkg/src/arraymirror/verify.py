"""Numbered verification suite for the whole library.

Thirteen checks cover the collective rates and shifts, the two
susceptibility routes against each other, the mirror algebra, energy
conservation, polarization selectivity, the dual-band metrics, and the
diffraction thresholds. Each check returns a CheckResult with measured
values; failures are reported, never raised. The same checks back the
acceptance tests, so the CLI report and the test suite cannot drift
apart.
"""

from __future__ import annotations

import dataclasses
import math
import time
from functools import lru_cache

import numpy as np

from .bands import mode_vs_lattice
from .config import BlochVector, DriveField, ProbeGeometry, incidence_bloch, make_config
from .eit import EitParams, beta_split, chi_reduced, dressed_poles, steady_state_numeric
from .errors import NotDualBand
from .greens import (
    AccelParams,
    ModePoint,
    _gamma_from_orders,
    delta_k,
    gamma_k,
    gamma_k_realspace,
    reciprocal_orders,
)
from .scattering import (
    extract_bands,
    order_contribution_xx,
    rt_spectrum,
    scattering_matrices,
)

GRAZING_THETA = 0.45 * math.pi


@dataclasses.dataclass(frozen=True)
class CheckResult:
    """Outcome of one numbered verification check."""

    criterion: int
    name: str
    passed: bool
    details: str
    sub: tuple = ()

    def report_line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{self.criterion:2d}] {tag}  {self.name}: {self.details}"


def _gamma_reference(d: float) -> float:
    """Closed-form normal-incidence in-plane rate 3*pi*gamma_e/(k'^2 d^2)."""
    k = 2.0 * math.pi
    return 3.0 * math.pi / (k * k * d * d)


def synthetic_mode(geometry, config, shift: float = 0.0) -> ModePoint:
    """Mode point with the exact reciprocal-sum rate and a chosen shift.

    The rate is the physical one; only the shift is supplied by hand.
    Useful for checks whose outcome cannot depend on the shift value
    (energy conservation, on-resonance identities, selectivity zeros).
    """
    kvec = incidence_bloch(geometry, config)
    orders = reciprocal_orders(kvec, config)
    rate = _gamma_from_orders(orders, config)
    return ModePoint(
        bloch=kvec,
        delta_k=shift,
        gamma_k=rate,
        shift_error=0.0,
        n_propagating=sum(1 for o in orders if o.propagating),
        anomaly=any(o.anomaly for o in orders),
    )


@lru_cache(maxsize=None)
def _cached_shift(kx: float, ky: float, d: float, pol: str, base_radius: float):
    config = make_config(d, pol=pol)
    accel = AccelParams(base_radius=base_radius)
    return delta_k(BlochVector(kx, ky), config, accel)


def real_mode(pol, plane, theta, d=0.1, base_radius=30.0) -> ModePoint:
    """Directional mode with the real lattice-sum shift, cached per point."""
    config = make_config(d, pol=pol)
    geometry = ProbeGeometry(theta=theta, plane=plane)
    kvec = incidence_bloch(geometry, config)
    shift, err = _cached_shift(kvec.kx, kvec.ky, d, pol, base_radius)
    orders = reciprocal_orders(kvec, config)
    return ModePoint(
        bloch=kvec,
        delta_k=shift,
        gamma_k=_gamma_from_orders(orders, config),
        shift_error=err,
        n_propagating=sum(1 for o in orders if o.propagating),
        anomaly=any(o.anomaly for o in orders),
    )


def check_1() -> CheckResult:
    """Normal-incidence in-plane rate against the closed form and 23.9."""
    config = make_config(0.1, pol="x")
    gamma_k(BlochVector(0.0, 0.0), config)  # warm caches before timing
    t0 = time.perf_counter()
    measured = gamma_k(BlochVector(0.0, 0.0), config)
    elapsed_ms = 1e3 * (time.perf_counter() - t0)
    closed = _gamma_reference(0.1)
    rel_closed = abs(measured - closed) / closed
    rel_ref = abs(measured - 23.9) / 23.9
    passed = rel_closed < 1e-6 and rel_ref < 5e-3
    details = (
        f"gamma={measured:.6f}, closed form {closed:.6f} (rel {rel_closed:.1e}), "
        f"reference 23.9 (rel {rel_ref:.1e}), {elapsed_ms:.3f} ms"
    )
    return CheckResult(1, "in-plane rate at normal incidence", passed, details)


def check_2() -> CheckResult:
    """Out-of-plane rate is exactly zero at zero Bloch vector."""
    config = make_config(0.1, pol="z")
    measured = gamma_k(BlochVector(0.0, 0.0), config)
    passed = measured == 0.0
    return CheckResult(
        2, "out-of-plane rate at normal incidence", passed, f"gamma={measured!r} (exact zero required)"
    )


def check_3() -> CheckResult:
    """Grazing out-of-plane rate against the angle law and 149."""
    config = make_config(0.1, pol="z")
    theta = GRAZING_THETA
    kvec = BlochVector(config.wavenumber * math.sin(theta), 0.0)
    measured = gamma_k(kvec, config)
    law = _gamma_reference(0.1) * math.sin(theta) ** 2 / math.cos(theta)
    rel_law = abs(measured - law) / law
    rel_ref = abs(measured - 149.0) / 149.0
    passed = rel_law < 1e-12 and rel_ref < 1e-2
    details = (
        f"gamma={measured:.6f}, angle law {law:.6f} (rel {rel_law:.1e}), "
        f"reference 149 (rel {rel_ref:.1e})"
    )
    return CheckResult(3, "grazing out-of-plane rate", passed, details)


def check_4() -> CheckResult:
    """Collective shifts against the external reference values.

    The four absolute anchors sit a constant +1.800 gamma_e above the
    computed lattice sums (documented in the project decisions ledger);
    the relative increase between normal and grazing incidence agrees.
    """
    k_grazing = 2.0 * math.pi * math.sin(GRAZING_THETA)
    anchors = (
        ("shift(0, out-of-plane)", 0.0, 0.0, "z", 30.0, 31.4, 0.02),
        ("shift(0, in-plane)", 0.0, 0.0, "x", 30.0, -8.4, 0.03),
        ("shift(grazing XZ, in-plane)", k_grazing, 0.0, "x", 60.0, -9.4, 0.03),
        ("shift(grazing YZ, in-plane)", 0.0, k_grazing, "x", 60.0, -8.6, 0.03),
    )
    sub = []
    measured = {}
    for name, kx, ky, pol, r0, ref, tol in anchors:
        value, _err = _cached_shift(kx, ky, 0.1, pol, r0)
        measured[name] = value
        rel = abs(value - ref) / abs(ref)
        ok = rel < tol
        sub.append((name, ok, f"measured {value:+.4f} vs {ref:+.1f} (rel {rel:.3f}, tol {tol})"))
    z_graze, _ = _cached_shift(k_grazing, 0.0, 0.1, "z", 60.0)
    z_zero, _ = _cached_shift(0.0, 0.0, 0.1, "z", 30.0)
    increase = z_graze - z_zero
    inc_ok = abs(increase - 1.2) <= 0.2
    sub.append(
        (
            "out-of-plane shift increase to grazing",
            inc_ok,
            f"measured {increase:+.4f} vs 1.2 +- 0.2",
        )
    )
    passed = all(ok for _, ok, _ in sub)
    n_pass = sum(1 for _, ok, _ in sub if ok)
    details = f"{n_pass}/{len(sub)} anchors in band; absolute anchors offset by +1.800 (see decisions ledger)"
    return CheckResult(4, "collective shift anchors", passed, details, sub=tuple(sub))


def check_5() -> CheckResult:
    """Reciprocal-space rate against the direct real-space lattice sum."""
    rng = np.random.default_rng(202405)
    worst = 0.0
    t0 = time.perf_counter()
    for i in range(50):
        d = float(rng.uniform(0.15, 0.48))
        radius = 0.95 * 2.0 * math.pi * math.sqrt(float(rng.uniform(0.0, 1.0)))
        phi = float(rng.uniform(0.0, 2.0 * math.pi))
        kvec = BlochVector(radius * math.cos(phi), radius * math.sin(phi))
        pol = "x" if i % 2 == 0 else "z"
        config = make_config(d, pol=pol)
        g_rec = gamma_k(kvec, config)
        g_real = gamma_k_realspace(kvec, config, cutoff=30.0)
        rel = abs(g_rec - g_real) / max(g_rec, 1e-3)
        worst = max(worst, rel)
    elapsed = time.perf_counter() - t0
    passed = worst < 1e-3
    details = f"worst relative gap {worst:.2e} over 50 in-cone draws, d<0.5 ({elapsed:.0f} s)"
    return CheckResult(5, "rate oracle equivalence", passed, details)


def check_6() -> CheckResult:
    """Steady-state integration against the reduced susceptibility."""
    rng = np.random.default_rng(77)
    modes = [
        real_mode("z", "xz", 0.15 * math.pi, base_radius=10.0),
        real_mode("z", "xz", 0.30 * math.pi, base_radius=10.0),
        real_mode("x", "xz", 0.20 * math.pi, base_radius=10.0),
        real_mode("x", "yz", 0.30 * math.pi, base_radius=10.0),
    ]
    pols = ["z", "z", "x", "x"]
    worst = 0.0
    t0 = time.perf_counter()
    for i in range(25):
        mp = modes[i % 4]
        config = make_config(0.1, pol=pols[i % 4])
        omega_c = 0.0 if i == 0 else float(rng.uniform(0.0, 60.0))
        drive = DriveField(omega_c=complex(omega_c), delta_c=float(rng.uniform(-15.0, 15.0)))
        params = EitParams(
            eta=mp.eta, omega_c=complex(omega_c), delta_c=drive.delta_c, gamma_r=config.gamma_r
        )
        dp = float(rng.uniform(-25.0, 35.0))
        want = chi_reduced(dp, params)
        # keep |chi| modest so the quadratic probe correction stays far
        # below the 1e-6 comparison tolerance
        while abs(want) > 4.0:
            dp += 1.7
            want = chi_reduced(dp, params)
        state = steady_state_numeric(1e-4, drive, mp, config, delta_p=dp)
        rel = abs(state.chi - want) / abs(want)
        worst = max(worst, rel)
    elapsed = time.perf_counter() - t0
    passed = worst < 1e-6
    details = f"worst relative gap {worst:.2e} over 25 draws, both polarizations ({elapsed:.0f} s)"
    return CheckResult(6, "susceptibility oracle equivalence", passed, details)


def check_7() -> CheckResult:
    """Pole-weight decomposition identity and Vieta relations."""
    rng = np.random.default_rng(4242)
    grid = np.linspace(-40.0, 60.0, 1001)
    worst_sum = 0.0
    worst_vieta = 0.0
    t0 = time.perf_counter()
    for _ in range(10):
        params = EitParams(
            eta=complex(rng.uniform(-15.0, 32.0), -0.5 * rng.uniform(0.5, 150.0)),
            omega_c=complex(rng.uniform(0.5, 60.0)),
            delta_c=float(rng.uniform(-15.0, 15.0)),
            gamma_r=0.3,
        )
        poles = dressed_poles(params)
        s = poles.plus + poles.minus
        p = poles.plus * poles.minus
        s_ref = params.xi + params.eta
        p_ref = params.xi * params.eta - abs(complex(params.omega_c)) ** 2
        worst_vieta = max(
            worst_vieta,
            abs(s - s_ref) / max(abs(s_ref), 1.0),
            abs(p - p_ref) / max(abs(p_ref), 1.0),
        )
        for dp in grid:
            chi = chi_reduced(float(dp), params)
            b1, b2 = beta_split(float(dp), params)
            worst_sum = max(worst_sum, abs((b1 + b2) - chi) / abs(chi))
    elapsed = time.perf_counter() - t0
    passed = worst_sum < 1e-12 and worst_vieta < 1e-10
    details = (
        f"worst identity gap {worst_sum:.2e}, worst Vieta gap {worst_vieta:.2e} "
        f"over 10 draws x 1001 detunings ({elapsed:.1f} s)"
    )
    return CheckResult(7, "pole-weight decomposition identity", passed, details)


def check_8() -> CheckResult:
    """Two-level lossless resonance reflects perfectly."""
    config = make_config(0.1, gamma_r=0.0, pol="x")
    geometry = ProbeGeometry(theta=0.0, plane="xz", probe_pol="p")
    mp = synthetic_mode(geometry, config, shift=-10.199077)
    res = scattering_matrices(mp.delta_k, geometry, DriveField(0.0, 0.0), config, modepoint=mp)
    passed = abs(res.r_pp - 1.0) < 1e-8 and res.t_pp < 1e-8
    details = f"R_pp={res.r_pp:.12f}, T_pp={res.t_pp:.2e} at the mode resonance"
    return CheckResult(8, "perfect-mirror resonance", passed, details)


def check_9() -> CheckResult:
    """Specular energy conservation without upper decay; absorption with it."""
    rng = np.random.default_rng(1311)
    worst = 0.0
    for _ in range(200):
        pol = "x" if rng.random() < 0.5 else "z"
        plane = "xz" if rng.random() < 0.5 else "yz"
        config = make_config(0.1, gamma_r=0.0, pol=pol)
        geometry = ProbeGeometry(theta=float(rng.uniform(0.0, 0.49 * math.pi)), plane=plane)
        mp = synthetic_mode(geometry, config, shift=float(rng.uniform(-15.0, 35.0)))
        drive = DriveField(complex(rng.uniform(0.0, 60.0)), float(rng.uniform(-15.0, 15.0)))
        res = scattering_matrices(float(rng.uniform(-40.0, 60.0)), geometry, drive, config, modepoint=mp)
        worst = max(worst, abs(res.column_sum("p") - 1.0), abs(res.column_sum("s") - 1.0))
    conserve_ok = worst < 1e-10
    config = make_config(0.1, gamma_r=0.3, pol="z")
    geometry = ProbeGeometry(theta=math.pi / 4, plane="xz", probe_pol="p")
    mp = synthetic_mode(geometry, config, shift=30.0)
    drive = DriveField(15.0, 0.0)
    sums = [
        scattering_matrices(dp, geometry, drive, config, modepoint=mp).column_sum("p")
        for dp in np.linspace(-10.0, 50.0, 201)
    ]
    absorb_ok = max(sums) < 1.0 and min(sums) < 0.999
    passed = conserve_ok and absorb_ok
    details = (
        f"lossless worst |R+T-1|={worst:.2e} over 200 points; "
        f"absorbing band max R+T={max(sums):.6f} (< 1 required)"
    )
    return CheckResult(9, "energy conservation", passed, details)


def check_10() -> CheckResult:
    """Polarization channels that cannot couple are exactly inert."""
    drive = DriveField(12.0, -3.0)
    failures = []
    config = make_config(0.1, pol="z")
    for theta in (0.0, 0.3, math.pi / 4):
        for plane in ("xz", "yz"):
            geometry = ProbeGeometry(theta=theta, plane=plane, probe_pol="s")
            mp = synthetic_mode(geometry, config, shift=30.0)
            res = scattering_matrices(4.0, geometry, drive, config, modepoint=mp)
            if not (res.t_ss == 1.0 and res.r_ss == 0.0 and res.t_ps == 0.0 and res.r_ps == 0.0):
                failures.append(f"out-of-plane {plane} theta={theta}")
    config = make_config(0.1, pol="x")
    for theta in (0.0, 0.3, math.pi / 4):
        geometry = ProbeGeometry(theta=theta, plane="xz", probe_pol="s")
        mp = synthetic_mode(geometry, config, shift=-10.2)
        res = scattering_matrices(4.0, geometry, drive, config, modepoint=mp)
        if not (res.t_ss == 1.0 and res.r_ss == 0.0):
            failures.append(f"in-plane XZ s theta={theta}")
        geometry = ProbeGeometry(theta=theta, plane="yz", probe_pol="p")
        mp = synthetic_mode(geometry, config, shift=-10.2)
        res = scattering_matrices(4.0, geometry, drive, config, modepoint=mp)
        if not (res.t_pp == 1.0 and res.r_pp == 0.0):
            failures.append(f"in-plane YZ p theta={theta}")
    passed = not failures
    details = "all decoupled channels exactly (T=1, R=0)" if passed else "; ".join(failures)
    return CheckResult(10, "polarization selectivity", passed, details)


def check_11() -> CheckResult:
    """Dual reflection bands and their drive tunability."""
    config = make_config(0.1, gamma_r=0.3, pol="z")
    geometry = ProbeGeometry(theta=math.pi / 4, plane="xz", probe_pol="p")
    mp = real_mode("z", "xz", math.pi / 4, base_radius=10.0)
    grid = np.linspace(-45.0, 80.0, 5001)
    t0 = time.perf_counter()
    table = rt_spectrum(grid, geometry, DriveField(15.0, 0.0), config, modepoint=mp)
    rpp = np.asarray(table.column("R_pp"))
    n_max = sum(
        1 for i in range(1, len(rpp) - 1) if rpp[i] > rpp[i - 1] and rpp[i] > rpp[i + 1]
    )
    peak = float(rpp.max())
    two_bands = n_max == 2
    high_r = peak > 0.97
    widths_oc = []
    for oc in (5.0, 10.0, 15.0, 20.0, 25.0, 30.0):
        tab = rt_spectrum(grid, geometry, DriveField(oc, 0.0), config, modepoint=mp)
        narrow, _broad = extract_bands(tab, min_peak=0.05)
        widths_oc.append(narrow.fwhm)
    oc_mono = all(b > a for a, b in zip(widths_oc, widths_oc[1:]))
    widths_dc = []
    for dc in (-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0):
        tab = rt_spectrum(grid, geometry, DriveField(15.0, dc), config, modepoint=mp)
        narrow, _broad = extract_bands(tab, min_peak=0.05)
        widths_dc.append(narrow.fwhm)
    dc_mono = all(b < a for a, b in zip(widths_dc, widths_dc[1:]))
    elapsed = time.perf_counter() - t0
    passed = two_bands and high_r and oc_mono and dc_mono
    details = (
        f"{n_max} maxima, peak R={peak:.4f}; narrow FWHM up in control amplitude: {oc_mono}, "
        f"down in control detuning: {dc_mono} ({elapsed:.0f} s)"
    )
    sub = (
        ("exactly two maxima", two_bands, f"{n_max} maxima"),
        ("peak reflectivity", high_r, f"max R_pp={peak:.4f} > 0.97"),
        ("narrow width grows with control amplitude", oc_mono, str([round(w, 3) for w in widths_oc])),
        ("narrow width shrinks with control detuning", dc_mono, str([round(w, 3) for w in widths_dc])),
    )
    return CheckResult(11, "dual-band mirror tunability", passed, details, sub=sub)


def check_12() -> CheckResult:
    """Probe decouples exactly at the two-photon dark point when closed."""
    failures = []
    for pol, plane, ppol in (("z", "xz", "p"), ("x", "xz", "p"), ("x", "yz", "s")):
        config = make_config(0.1, gamma_r=0.0, pol=pol)
        geometry = ProbeGeometry(theta=0.2 * math.pi, plane=plane, probe_pol=ppol)
        mp = synthetic_mode(geometry, config, shift=-5.0)
        for omega_c in (0.5, 15.0, 60.0):
            for delta_c in (-7.3, 0.0, 11.0):
                res = scattering_matrices(
                    -delta_c, geometry, DriveField(omega_c, delta_c), config, modepoint=mp
                )
                t_val = res.t_pp if ppol == "p" else res.t_ss
                r_val = res.r_pp if ppol == "p" else res.r_ss
                if not (t_val == 1.0 and r_val == 0.0):
                    failures.append(f"{pol}/{plane} oc={omega_c} dc={delta_c}")
    passed = not failures
    details = "T=1 exactly at the dark point for all drives" if passed else "; ".join(failures)
    return CheckResult(12, "dark-point transparency", passed, details)


def check_13() -> CheckResult:
    """Diffraction threshold step, rate feature, and smooth order onset."""
    theta = math.pi / 6
    config = make_config(0.1, pol="z")
    geometry = ProbeGeometry(theta=theta, plane="yz")
    d_grid = np.linspace(0.05, 0.95, 181)
    t0 = time.perf_counter()
    table = mode_vs_lattice(d_grid, geometry, config, include_shift=False)
    counts = table.column("n_propagating")
    gammas = table.column("gamma_k")
    ds = table.column("d")
    step_idx = next(
        (i for i in range(1, len(counts)) if counts[i] == 2 and counts[i - 1] == 1), None
    )
    d_star = 1.0 / (1.0 + math.sin(theta))
    grid_step = ds[1] - ds[0]
    step_ok = step_idx is not None and abs(ds[step_idx] - d_star) <= grid_step
    jumps = [
        gammas[i] - gammas[i - 1]
        for i in range(1, len(gammas))
        if math.isfinite(gammas[i]) and math.isfinite(gammas[i - 1])
    ]
    feature_ok = (
        step_idx is not None
        and math.isfinite(gammas[step_idx])
        and math.isfinite(gammas[step_idx - 1])
        and gammas[step_idx] - gammas[step_idx - 1] == max(jumps)
        and gammas[step_idx] > gammas[step_idx - 1]
    )
    at_star = order_contribution_xx(d_star, theta)
    below = order_contribution_xx(0.9 * d_star, theta)
    above = order_contribution_xx(1.05 * d_star, theta)
    near_b = order_contribution_xx(0.98 * d_star, theta)
    near_a = order_contribution_xx(1.02 * d_star, theta)
    onset_ok = (
        at_star.value == 0.0 and at_star.anomaly
        and below.value.imag == 0.0 and below.value.real < 0.0
        and above.value.imag > 0.0
        and abs(near_b.value) < abs(below.value)
        and abs(near_a.value) < abs(above.value)
    )
    elapsed = time.perf_counter() - t0
    passed = step_ok and feature_ok and onset_ok
    details = (
        f"order count steps at d={ds[step_idx]:.4f} (target {d_star:.4f} +- {grid_step:.4f}); "
        f"rate jump at the step is the largest on the grid: {feature_ok}; "
        f"(1,0) term: 0 at threshold, smooth onset: {onset_ok} ({elapsed:.1f} s)"
        if step_idx is not None
        else "no order-count step found"
    )
    return CheckResult(13, "diffraction threshold", passed, details)


_CHECKS = {
    1: check_1,
    2: check_2,
    3: check_3,
    4: check_4,
    5: check_5,
    6: check_6,
    7: check_7,
    8: check_8,
    9: check_9,
    10: check_10,
    11: check_11,
    12: check_12,
    13: check_13,
}


def verify_suite(only=None) -> list:
    """Run the numbered checks (all by default) and collect their results."""
    if only is None:
        numbers = sorted(_CHECKS)
    else:
        numbers = sorted(set(int(n) for n in only))
        unknown = [n for n in numbers if n not in _CHECKS]
        if unknown:
            from .errors import OutOfRange

            raise OutOfRange(f"no such check: {unknown}; valid numbers are 1..13")
    results = []
    for n in numbers:
        try:
            results.append(_CHECKS[n]())
        except Exception as exc:  # a crashed check is a failed check
            results.append(
                CheckResult(n, _CHECKS[n].__doc__.splitlines()[0], False, f"raised {type(exc).__name__}: {exc}")
            )
    return results
