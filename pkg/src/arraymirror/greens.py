"""Free-space dyadic tensor and the lattice sums behind the collective mode.

The collective mode at Bloch vector k is eta = delta_k - i*gamma_k/2. The
decay rate gamma_k is an exact finite sum over propagating reciprocal
orders. The shift delta_k needs the conditionally convergent real-space
dipole sum, which is evaluated under Gaussian damping exp(-(r/R)^2) at
three radii R, 2R, 4R and Richardson-extrapolated to the undamped limit
(the damped sums behave polynomially in 1/R^2, so two extrapolation levels
cancel the leading corrections). A brute-force decay rate from the same
damped sum is kept around purely as a cross-check oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import WAVENUMBER, BlochVector, SystemConfig, as_bloch
from .errors import NoConvergence, OutOfRange, ZeroDisplacement

# relative closeness of |p_m| to the light line that counts as a Rayleigh anomaly
ANOMALY_RTOL = 1e-9

# sites per vectorized block in the real-space kernel; fixed so the
# summation order (and therefore the result, bit for bit) never depends on
# the machine the sum runs on
_BLOCK_SITES = 2_000_000


def free_green(displacement, wavenumber=WAVENUMBER) -> np.ndarray:
    """Free-space dyadic Green's tensor at a displacement, outgoing convention.

    Returns the symmetric complex 3x3 tensor
    (e^{ikr}/4 pi r) [(1 + i/(kr) - 1/(kr)^2) I + (-1 - 3i/(kr) + 3/(kr)^2) rhat rhat],
    in units of inverse length. Even in the displacement. The transverse
    self-term limit reproduces the single-atom linewidth, which the tests
    pin through the small-argument series.
    """
    r = np.asarray(displacement, dtype=float)
    if r.shape != (3,):
        raise OutOfRange(f"displacement must be a 3-vector, got shape {r.shape}")
    dist = float(np.linalg.norm(r))
    if dist == 0.0:
        raise ZeroDisplacement("free-space tensor diverges at zero separation")
    x = wavenumber * dist
    pref = np.exp(1j * x) / (4.0 * np.pi * dist)
    scal = 1.0 + 1j / x - 1.0 / x**2
    struct = -1.0 - 3.0j / x + 3.0 / x**2
    rhat = r / dist
    return pref * (scal * np.eye(3) + struct * np.outer(rhat, rhat))


@dataclass(frozen=True)
class OrderTerm:
    """One reciprocal-lattice diffraction order at a given Bloch vector.

    kappa is the outgoing normal wavevector component, real and positive
    for a propagating order, positive imaginary for an evanescent one.
    pol_factor is the transversality weight that sets the order's share of
    the radiative decay; it is symmetrized over the two emission
    directions normal to the array, which for in-plane or normal dipole
    presets coincides with 1 - |p.K|^2 and continues smoothly through the
    evanescent regime.
    """

    mx: int
    my: int
    px: float
    py: float
    kappa: complex
    propagating: bool
    pol_factor: float
    anomaly: bool


def reciprocal_orders(kvec, config: SystemConfig, max_order: int = 3) -> list[OrderTerm]:
    """Enumerate diffraction orders with |m_x|, |m_y| <= max_order.

    Sorted by |m| with lexicographic tie-breaking. Orders whose in-plane
    wavevector sits on the light line within ANOMALY_RTOL are flagged
    rather than rejected; sweeps crossing a threshold rely on that.
    """
    if max_order < 0:
        raise OutOfRange(f"max_order must be nonnegative, got {max_order}")
    kb = as_bloch(kvec)
    k = config.wavenumber
    g = 2.0 * math.pi / config.lattice_constant
    polx, poly, polz = config.polarization
    span = range(-max_order, max_order + 1)
    ms = sorted(
        ((mx, my) for mx in span for my in span),
        key=lambda m: (math.hypot(m[0], m[1]), m[0], m[1]),
    )
    terms = []
    for mx, my in ms:
        px = kb.kx - g * mx
        py = kb.ky - g * my
        p_sq = px * px + py * py
        kappa_sq = k * k - p_sq
        if kappa_sq >= 0.0:
            kappa = complex(math.sqrt(kappa_sq), 0.0)
        else:
            kappa = complex(0.0, math.sqrt(-kappa_sq))
        in_plane = (polx * px + poly * py) / k
        f = 1.0 - in_plane * in_plane - polz * polz * kappa_sq / (k * k)
        terms.append(
            OrderTerm(
                mx=mx,
                my=my,
                px=px,
                py=py,
                kappa=kappa,
                propagating=p_sq < k * k,
                pol_factor=f,
                anomaly=abs(kappa_sq) < ANOMALY_RTOL * k * k,
            )
        )
    return terms


def _gamma_from_orders(orders, config: SystemConfig) -> float:
    k = config.wavenumber
    d = config.lattice_constant
    total = 0.0
    for t in orders:
        if not t.propagating:
            continue
        kap = t.kappa.real
        if kap < ANOMALY_RTOL * k:
            # a propagating order collapsing onto the light line makes the
            # 1/kappa sum blow up; report the divergence as a sentinel
            return math.inf
        total += t.pol_factor / kap
    return (3.0 * math.pi * config.gamma_e / (k * d * d)) * total


def gamma_k(kvec, config: SystemConfig, max_order: int = 3) -> float:
    """Collective decay rate at Bloch vector k, exact reciprocal-space form.

    Sums f_m/kappa_m over the propagating orders; zero outside the light
    cone when nothing propagates, +inf (a flagged sentinel, not an
    exception) when a propagating order sits on a Rayleigh anomaly.
    """
    return _gamma_from_orders(reciprocal_orders(kvec, config, max_order), config)


@dataclass(frozen=True)
class AccelParams:
    """Controls for the damped real-space sums.

    base_radius R0 sets the Gaussian damping ladder {R0, 2 R0, 4 R0} in
    wavelengths. Sites are enumerated over a disk disk_factor times the
    largest damping radius; anything much tighter leaves boundary ringing
    that poisons the extrapolation. tolerance is the relative error target
    for the extrapolated value, floored at one linewidth so near-zero
    shifts are judged on an absolute scale.
    """

    base_radius: float = 30.0
    disk_factor: float = 3.5
    tolerance: float = 1e-3

    def __post_init__(self):
        if not math.isfinite(self.base_radius) or self.base_radius < 2.0:
            raise OutOfRange(f"base_radius must be at least 2 wavelengths, got {self.base_radius!r}")
        if not math.isfinite(self.disk_factor) or self.disk_factor < 1.0:
            raise OutOfRange(f"disk_factor must be at least 1, got {self.disk_factor!r}")
        if not (self.tolerance > 0.0):
            raise OutOfRange(f"tolerance must be positive, got {self.tolerance!r}")


def _damped_mode_sums(kb: BlochVector, config: SystemConfig, accel: AccelParams) -> np.ndarray:
    """Gaussian-damped sums of the Bloch-phased projected tensor.

    Returns one complex sum per damping radius (base, 2*base, 4*base), all
    accumulated over the same site disk in a fixed block order, so equal
    inputs give bitwise-equal results.
    """
    d = config.lattice_constant
    k = config.wavenumber
    polx, poly, _ = config.polarization
    r0 = accel.base_radius
    disk = accel.disk_factor * 4.0 * r0
    disk_sq = disk * disk
    nmax = int(disk / d) + 1
    coords = np.arange(-nmax, nmax + 1) * d
    ncols = coords.size
    rows_per_block = max(1, _BLOCK_SITES // ncols)
    sums = np.zeros(3, dtype=complex)
    for start in range(0, ncols, rows_per_block):
        xs = coords[start : start + rows_per_block]
        r_sq = xs[:, None] ** 2 + coords[None, :] ** 2
        mask = (r_sq > 0.0) & (r_sq <= disk_sq)
        if not mask.any():
            continue
        x = np.broadcast_to(xs[:, None], r_sq.shape)[mask]
        y = np.broadcast_to(coords[None, :], r_sq.shape)[mask]
        r = np.sqrt(r_sq[mask])
        inv = 1.0 / (k * r)
        # projected tensor p.G.p for sites in the array plane; only the
        # in-plane dipole components see the rhat rhat structure term
        radial = (polx * x + poly * y) / r
        angular = (-1.0 - 3.0j * inv + 3.0 * inv * inv) * (radial * radial)
        angular += 1.0 + 1.0j * inv - inv * inv
        # propagation and Bloch phases combined into a single exponential
        phase = np.exp(1j * (k * r - (kb.kx * x + kb.ky * y)))
        base = phase / (4.0 * np.pi * r) * angular
        damp_big = np.exp(-((r / (4.0 * r0)) ** 2))
        damp_mid = damp_big**4
        damp_small = damp_mid**4
        sums[0] += np.sum(base * damp_small)
        sums[1] += np.sum(base * damp_mid)
        sums[2] += np.sum(base * damp_big)
    return sums


def _extrapolate(sums) -> tuple[complex, complex]:
    """Two Richardson levels in 1/R^2 over the damping ladder.

    Returns the final extrapolant and the last first-level one; their gap
    serves as the error estimate.
    """
    s1, s2, s3 = sums
    e1 = (4.0 * s2 - s1) / 3.0
    e2 = (4.0 * s3 - s2) / 3.0
    return (16.0 * e2 - e1) / 15.0, e2


def _mode_sum_extrapolated(kb, config, accel) -> tuple[complex, complex]:
    sums = _damped_mode_sums(kb, config, accel)
    pref = -3.0 * math.pi * config.gamma_e / config.wavenumber
    best, prev = _extrapolate(sums)
    return pref * best, pref * prev


def delta_k(kvec, config: SystemConfig, accel: AccelParams | None = None) -> tuple[float, float]:
    """Collective frequency shift at Bloch vector k, with an error estimate.

    Runs the damped real-space sum over the three ladder radii and
    extrapolates. Raises NoConvergence when the estimate exceeds the
    requested tolerance relative to the shift (floored at one linewidth);
    near-grazing Bloch vectors converge slowly and need a larger
    base_radius than the default.
    """
    accel = accel if accel is not None else AccelParams()
    kb = as_bloch(kvec)
    best, prev = _mode_sum_extrapolated(kb, config, accel)
    shift = best.real
    err = abs(best.real - prev.real)
    if err > accel.tolerance * max(abs(shift), config.gamma_e):
        raise NoConvergence(
            f"shift {shift:.6f} at k=({kb.kx:.4f}, {kb.ky:.4f}) carries residual {err:.3e}; "
            f"raise base_radius above {accel.base_radius} or loosen the tolerance"
        )
    return shift, err


def gamma_k_realspace(kvec, config: SystemConfig, cutoff: float = 30.0) -> float:
    """Brute-force decay rate from the damped real-space sum. Oracle only.

    cutoff is the base damping radius in wavelengths (at least 20; the
    ladder scales with it exactly as for delta_k). The site disk is padded
    wider than the shift path uses: the rate rides on the imaginary part
    of the damped sum at absolute scale ~1e-6, and a 3.5x disk clips
    enough Gaussian tail off the largest rung to leave a few-microrate
    bias at small rates. 4.5x pushes that below 1e-9. The
    reciprocal-space gamma_k is the production path, this exists to check
    it.
    """
    if cutoff < 20.0:
        raise OutOfRange(f"oracle cutoff must be at least 20 wavelengths, got {cutoff!r}")
    accel = AccelParams(base_radius=float(cutoff), disk_factor=4.5)
    kb = as_bloch(kvec)
    best, prev = _mode_sum_extrapolated(kb, config, accel)
    rate = config.gamma_e - 2.0 * best.imag
    err = 2.0 * abs(best.imag - prev.imag)
    if err > accel.tolerance * max(abs(rate), config.gamma_e):
        raise NoConvergence(
            f"oracle decay rate {rate:.6f} carries residual {err:.3e}; raise the cutoff"
        )
    return rate


@dataclass(frozen=True)
class ModePoint:
    """Collective mode at one Bloch vector.

    Carries the accelerated shift with its error estimate, the exact decay
    rate, the propagating-order count and the anomaly flag. eta combines
    shift and rate by construction, so the two views can never drift
    apart.
    """

    bloch: BlochVector
    delta_k: float
    gamma_k: float
    shift_error: float
    n_propagating: int
    anomaly: bool

    @property
    def eta(self) -> complex:
        return complex(self.delta_k, -0.5 * self.gamma_k)


def eta(kvec, config: SystemConfig, accel: AccelParams | None = None, max_order: int = 3) -> ModePoint:
    """Assemble the collective mode point at one Bloch vector.

    Shift from the accelerated real-space sum, decay rate from the exact
    reciprocal sum. NoConvergence propagates; an anomaly shows up as the
    flag plus a +inf rate.
    """
    kb = as_bloch(kvec)
    shift, err = delta_k(kb, config, accel)
    orders = reciprocal_orders(kb, config, max_order)
    rate = _gamma_from_orders(orders, config)
    return ModePoint(
        bloch=kb,
        delta_k=shift,
        gamma_k=rate,
        shift_error=err,
        n_propagating=sum(1 for t in orders if t.propagating),
        anomaly=any(t.anomaly for t in orders),
    )
