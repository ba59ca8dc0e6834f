"""Ladder-EIT response of a single collective mode.

The collective mode behaves as an effective two-level emitter with complex
detuning parameter eta = delta_k - i*gamma_k/2. A control field of Rabi
frequency omega_c couples the excited level to a metastable third level
(decay rate gamma_r), which splits the single resonance into two decaying
dressed poles. Everything here works per unit probe amplitude: chi is the
steady-state coherence divided by the probe Rabi frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .config import DriveField, SystemConfig
from .errors import Degenerate, DegeneratePoles, NoSteadyState, OutOfRange

# chi denominators smaller than this count as a genuine pole hit
_DENOM_FLOOR = 1e-14
# dressed poles closer than this cannot be split into partial fractions
_POLE_GAP_FLOOR = 1e-10


@dataclass(frozen=True)
class EitParams:
    """Inputs of the reduced susceptibility for one mode and one drive."""

    eta: complex
    omega_c: complex
    delta_c: float
    gamma_r: float

    def __post_init__(self):
        eta = complex(self.eta)
        if not (math.isfinite(eta.real) and math.isfinite(eta.imag)):
            raise OutOfRange(f"mode parameter must be finite, got {eta}")
        if eta.imag > 0.0:
            raise OutOfRange(
                f"mode parameter must have nonpositive imaginary part, got {eta}"
            )
        if not (math.isfinite(self.gamma_r) and self.gamma_r >= 0.0):
            raise OutOfRange(f"gamma_r must be a nonnegative number, got {self.gamma_r}")
        oc = complex(self.omega_c)
        if not (math.isfinite(oc.real) and math.isfinite(oc.imag)):
            raise OutOfRange(f"control amplitude must be finite, got {oc}")

    @property
    def xi(self) -> complex:
        """Complex two-photon parameter: -delta_c - i*gamma_r/2."""
        return complex(-self.delta_c, -0.5 * self.gamma_r)


def xi(drive: DriveField, config: SystemConfig) -> complex:
    """Two-photon pole position set by the control detuning and upper decay."""
    return complex(-drive.delta_c, -0.5 * config.gamma_r)


def eit_params(modepoint, drive: DriveField, config: SystemConfig) -> EitParams:
    """Bundle a collective mode point with a drive into susceptibility inputs."""
    return EitParams(
        eta=modepoint.eta,
        omega_c=complex(drive.omega_c),
        delta_c=drive.delta_c,
        gamma_r=config.gamma_r,
    )


def chi_reduced(delta_p: float, params: EitParams) -> complex:
    """Reduced weak-probe susceptibility at probe detuning delta_p.

    chi = 1 / (eta - delta_p - |omega_c|^2 / (xi - delta_p)).

    Without a control field this is the bare mode Lorentzian. When the
    two-photon denominator vanishes exactly (possible only for gamma_r = 0
    at the two-photon resonance) the control term diverges and the probe
    decouples, so chi is exactly zero there.
    """
    oc2 = abs(complex(params.omega_c)) ** 2
    if oc2 == 0.0:
        denom = params.eta - delta_p
        if abs(denom) < _DENOM_FLOOR:
            raise Degenerate(
                f"probe detuning {delta_p} sits on the bare mode pole {params.eta}"
            )
        return 1.0 / denom
    inner = params.xi - delta_p
    if inner == 0.0:
        return 0.0j
    denom = params.eta - delta_p - oc2 / inner
    if abs(denom) < _DENOM_FLOOR:
        raise Degenerate(
            f"probe detuning {delta_p} sits on a dressed pole (denominator {denom})"
        )
    return 1.0 / denom


@dataclass(frozen=True)
class DressedPoles:
    """The two complex poles of the dressed response, plus branch first.

    "Plus" is the pole with the larger real part; on a tie the one with the
    larger imaginary part (slower decay) comes first.
    """

    plus: complex
    minus: complex

    @property
    def splitting(self) -> complex:
        return self.plus - self.minus


def dressed_poles(params: EitParams) -> DressedPoles:
    """Roots of the quadratic denominator of the reduced susceptibility.

    The poles satisfy plus + minus = xi + eta and
    plus * minus = xi * eta - |omega_c|^2.
    """
    s = params.xi + params.eta
    disc = (params.xi - params.eta) ** 2 + 4.0 * abs(complex(params.omega_c)) ** 2
    root = np.sqrt(complex(disc))
    a = 0.5 * (s + root)
    b = 0.5 * (s - root)
    if (a.real, a.imag) >= (b.real, b.imag):
        return DressedPoles(plus=a, minus=b)
    return DressedPoles(plus=b, minus=a)


def beta_split(delta_p: float, params: EitParams):
    """Partial-fraction weights of chi over the two dressed poles.

    Returns (beta1, beta2) with beta1 attached to the plus pole. Their sum
    reproduces chi_reduced exactly. Raises DegeneratePoles when the two
    poles coincide to within 1e-10 and the split is ill defined.
    """
    poles = dressed_poles(params)
    gap = poles.splitting
    if abs(gap) < _POLE_GAP_FLOOR:
        raise DegeneratePoles(
            f"dressed poles collapse ({poles.plus} vs {poles.minus}), no unique split"
        )
    d_plus = delta_p - poles.plus
    d_minus = delta_p - poles.minus
    if abs(d_plus) < _DENOM_FLOOR or abs(d_minus) < _DENOM_FLOOR:
        raise Degenerate(f"probe detuning {delta_p} sits on a dressed pole")
    beta1 = (params.xi - poles.plus) / (gap * d_plus)
    beta2 = (poles.minus - params.xi) / (gap * d_minus)
    return beta1, beta2


@dataclass(frozen=True)
class SteadyState:
    """Converged one-atom steady state under probe and control drive."""

    rho_gg: float
    rho_ee: float
    rho_rr: float
    rho_eg: complex
    rho_rg: complex
    rho_re: complex
    omega_p: complex
    delta_p: float
    elapsed: float
    residual: float

    def density_matrix(self) -> np.ndarray:
        """Full 3x3 density matrix in the basis (ground, excited, metastable)."""
        eg, rg, re = self.rho_eg, self.rho_rg, self.rho_re
        return np.array(
            [
                [self.rho_gg, np.conj(eg), np.conj(rg)],
                [eg, self.rho_ee, np.conj(re)],
                [rg, re, self.rho_rr],
            ],
            dtype=complex,
        )

    @property
    def chi(self) -> complex:
        """Coherence per unit probe amplitude; needs a nonzero probe."""
        op = complex(self.omega_p)
        if op == 0.0:
            raise OutOfRange("susceptibility is undefined at zero probe amplitude")
        return complex(self.rho_eg) / op


def _bloch_rhs(eta, xi_val, omega_p, omega_c, gamma_k, gamma_r, delta_p):
    """Right-hand side of the three-level optical Bloch equations.

    State layout: [Re eg, Im eg, Re rg, Im rg, Re re, Im re, gg, ee] with
    rr eliminated through the unit trace.
    """
    c_eg = -1j * (eta - delta_p)
    c_rg = -1j * (xi_val - delta_p)
    c_re = -1j * (xi_val - np.conj(eta))
    op_c = np.conj(omega_p)
    oc_c = np.conj(omega_c)

    def rhs(_t, y):
        eg = complex(y[0], y[1])
        rg = complex(y[2], y[3])
        re = complex(y[4], y[5])
        gg = y[6]
        ee = y[7]
        rr = 1.0 - gg - ee
        d_eg = c_eg * eg + 1j * omega_p * (gg - ee) + 1j * oc_c * rg
        d_rg = c_rg * rg + 1j * omega_c * eg - 1j * omega_p * re
        d_re = c_re * re - 1j * omega_c * (rr - ee) - 1j * op_c * rg
        pump_p = 2.0 * (op_c * eg).imag
        pump_c = 2.0 * (oc_c * re).imag
        d_gg = gamma_k * ee - pump_p
        d_ee = -gamma_k * ee + gamma_r * rr + pump_p - pump_c
        return [
            d_eg.real, d_eg.imag,
            d_rg.real, d_rg.imag,
            d_re.real, d_re.imag,
            d_gg, d_ee,
        ]

    return rhs


def steady_state_numeric(
    omega_p,
    drive: DriveField,
    modepoint,
    config: SystemConfig,
    delta_p: float = 0.0,
) -> SteadyState:
    """Integrate the full Bloch equations until the state stops moving.

    This is the brute-force check on chi_reduced: no weak-probe expansion,
    no adiabatic elimination. The probe must stay perturbative
    (|omega_p| <= 1e-2) and at least one decay channel must be open.
    """
    op = complex(omega_p)
    if abs(op) > 1e-2:
        raise OutOfRange(f"probe amplitude {abs(op)} exceeds the weak-drive bound 1e-2")
    gamma_k = float(modepoint.gamma_k)
    gamma_r = float(config.gamma_r)
    if not math.isfinite(gamma_k) or gamma_k < 0.0:
        raise OutOfRange(f"mode decay rate must be finite and nonnegative, got {gamma_k}")
    if gamma_k + gamma_r <= 0.0:
        raise OutOfRange("no decay channel open: gamma_k + gamma_r must be positive")
    eta = complex(modepoint.eta)
    xi_val = complex(-drive.delta_c, -0.5 * gamma_r)
    rhs = _bloch_rhs(eta, xi_val, op, complex(drive.omega_c), gamma_k, gamma_r, delta_p)

    # residuals must resolve coherences of order |omega_p| * chi, so the
    # stopping threshold tightens with the probe instead of sitting at the
    # coarse 1e-10 that a strong probe would tolerate
    threshold = min(1e-10, max(1e-13, abs(op) * 1e-9))
    rate = min(gamma_k + gamma_r, 1.0)
    chunk = 25.0 / rate
    budget = 1.0e5 / rate

    y = np.zeros(8)
    y[6] = 1.0  # start in the ground state
    elapsed = 0.0
    residual = math.inf
    while elapsed < budget:
        sol = solve_ivp(
            rhs,
            (0.0, chunk),
            y,
            method="DOP853",
            rtol=1e-11,
            atol=1e-17,
            t_eval=(chunk,),
        )
        if not sol.success:
            raise NoSteadyState(f"integrator failed after t={elapsed}: {sol.message}")
        y = sol.y[:, -1]
        elapsed += chunk
        residual = max(abs(v) for v in rhs(0.0, y))
        if residual < threshold:
            break
    else:
        raise NoSteadyState(
            f"residual {residual:.3e} still above {threshold:.1e} after t={elapsed:.1f}"
        )

    return SteadyState(
        rho_gg=float(y[6]),
        rho_ee=float(y[7]),
        rho_rr=float(1.0 - y[6] - y[7]),
        rho_eg=complex(y[0], y[1]),
        rho_rg=complex(y[2], y[3]),
        rho_re=complex(y[4], y[5]),
        omega_p=op,
        delta_p=float(delta_p),
        elapsed=elapsed,
        residual=float(residual),
    )


def susceptibility_spectrum(dp_grid, params: EitParams):
    """Tabulate chi and its two pole weights over a probe-detuning grid."""
    from .tables import SweepTable, join_flags

    dp_grid = np.asarray(dp_grid, dtype=float)
    if dp_grid.ndim != 1 or dp_grid.size == 0:
        raise OutOfRange("probe detuning grid must be a nonempty 1d array")
    n = dp_grid.size
    chi = np.empty(n, dtype=complex)
    b1 = np.empty(n, dtype=complex)
    b2 = np.empty(n, dtype=complex)
    flags = []
    for i, dp in enumerate(dp_grid):
        tokens = []
        try:
            chi[i] = chi_reduced(float(dp), params)
        except Degenerate:
            chi[i] = complex(math.nan, math.nan)
            tokens.append("on-pole")
        try:
            b1[i], b2[i] = beta_split(float(dp), params)
        except DegeneratePoles:
            b1[i] = b2[i] = complex(math.nan, math.nan)
            tokens.append("degenerate-poles")
        except Degenerate:
            b1[i] = b2[i] = complex(math.nan, math.nan)
            if "on-pole" not in tokens:
                tokens.append("on-pole")
        flags.append(join_flags(tokens))
    columns = {
        "delta_p": [float(v) for v in dp_grid],
        "re_chi": [float(v) for v in chi.real],
        "im_chi": [float(v) for v in chi.imag],
        "re_beta1": [float(v) for v in b1.real],
        "im_beta1": [float(v) for v in b1.imag],
        "re_beta2": [float(v) for v in b2.real],
        "im_beta2": [float(v) for v in b2.imag],
        "flags": flags,
    }
    meta = {
        "mode_eta": [params.eta.real, params.eta.imag],
        "omega_c": [complex(params.omega_c).real, complex(params.omega_c).imag],
        "delta_c": params.delta_c,
        "gamma_r": params.gamma_r,
    }
    return SweepTable(columns=columns, meta=meta)
