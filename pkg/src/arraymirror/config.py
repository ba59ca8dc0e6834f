"""Reduced-unit system description, incidence geometry and Brillouin-zone paths.

Everything downstream works in reduced units: lengths in units of the
resonant wavelength and rates in units of the bare excited-state linewidth.
The probe wavenumber is pinned to 2*pi regardless of detuning, since the
detunings of interest are a vanishing fraction of the optical frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import BadPolarization, OutOfRange, OutOfZone

WAVELENGTH = 1.0
WAVENUMBER = 2.0 * math.pi / WAVELENGTH
GAMMA_E = 1.0

# polar angle cap, keeps the grazing 1/cos(theta) prefactors finite
THETA_MAX = 0.49 * math.pi

_POL_PRESETS = {
    "x": (1.0, 0.0, 0.0),
    "z": (0.0, 0.0, 1.0),
}


@dataclass(frozen=True)
class SystemConfig:
    """Validated array parameters in reduced units.

    lattice_constant must stay subwavelength. gamma_r is the linewidth of
    the upper (metastable) level relative to the e level. polarization is
    the real unit 3-vector giving the dipole orientation shared by all
    atoms; circular orientations are out of scope.
    """

    lattice_constant: float
    gamma_r: float
    polarization: tuple[float, float, float]
    wavelength: float = WAVELENGTH
    wavenumber: float = WAVENUMBER
    gamma_e: float = GAMMA_E

    def __post_init__(self):
        d = self.lattice_constant
        if not (isinstance(d, (int, float)) and math.isfinite(d)) or not 0.0 < d < self.wavelength:
            raise OutOfRange(
                f"lattice constant must lie in (0, {self.wavelength}), got {d!r}"
            )
        if not math.isfinite(self.gamma_r) or self.gamma_r < 0.0:
            raise OutOfRange(f"gamma_r must be finite and nonnegative, got {self.gamma_r!r}")
        norm = math.sqrt(sum(c * c for c in self.polarization))
        if abs(norm - 1.0) > 1e-12:
            raise BadPolarization(f"dipole orientation is not unit length, |p| = {norm}")

    @property
    def pol(self) -> np.ndarray:
        return np.asarray(self.polarization, dtype=float)


def make_config(d, gamma_r=0.3, pol="z") -> SystemConfig:
    """Build a validated SystemConfig.

    pol is either a preset axis name ("x" or "z") or any real 3-sequence,
    which gets normalized. Rejects non-subwavelength spacings, negative
    upper-level linewidths and orientations that cannot be normalized.
    """
    if isinstance(pol, str):
        key = pol.lower()
        if key not in _POL_PRESETS:
            raise BadPolarization(f"unknown orientation preset {pol!r}, use 'x' or 'z'")
        vec = _POL_PRESETS[key]
    else:
        arr = np.asarray(pol)
        if np.iscomplexobj(arr):
            raise BadPolarization("dipole orientation must be real valued")
        if arr.shape != (3,):
            raise BadPolarization(f"dipole orientation must be a 3-vector, got shape {arr.shape}")
        arr = arr.astype(float)
        if not np.all(np.isfinite(arr)):
            raise BadPolarization("dipole orientation must be finite")
        norm = float(np.linalg.norm(arr))
        if norm == 0.0 or not math.isfinite(norm):
            raise BadPolarization("dipole orientation has no direction to normalize")
        arr = arr / norm
        renorm = float(np.linalg.norm(arr))
        if abs(renorm - 1.0) > 1e-9:
            raise BadPolarization("dipole orientation failed to normalize")
        vec = tuple(float(c / renorm) for c in arr)
    if not isinstance(d, (int, float)) or not math.isfinite(float(d)):
        raise OutOfRange(f"lattice constant must be a finite number, got {d!r}")
    if not isinstance(gamma_r, (int, float)) or not math.isfinite(float(gamma_r)):
        raise OutOfRange(f"gamma_r must be a finite number, got {gamma_r!r}")
    return SystemConfig(float(d), float(gamma_r), vec)


@dataclass(frozen=True)
class ProbeGeometry:
    """Oblique plane-wave incidence: polar angle, incidence plane, driven polarization.

    The plane tag fixes the azimuth (the in-plane wavevector lies along x
    for "xz" and along y for "yz") and also fixes the basis convention in
    the normal-incidence limit. probe_pol marks which polarization channel
    a sweep treats as driven when reporting energy-balance columns.
    """

    theta: float
    plane: str = "xz"
    probe_pol: str = "p"

    def __post_init__(self):
        if not math.isfinite(self.theta) or not 0.0 <= self.theta <= THETA_MAX:
            raise OutOfRange(f"theta must lie in [0, 0.49*pi], got {self.theta!r}")
        plane = str(self.plane).lower()
        if plane not in ("xz", "yz"):
            raise OutOfRange(f"incidence plane must be 'xz' or 'yz', got {self.plane!r}")
        object.__setattr__(self, "plane", plane)
        pp = str(self.probe_pol).lower()
        if pp not in ("s", "p"):
            raise OutOfRange(f"probe polarization must be 's' or 'p', got {self.probe_pol!r}")
        object.__setattr__(self, "probe_pol", pp)


@dataclass(frozen=True)
class BlochVector:
    """In-plane wavevector in radians per wavelength, plus an optional
    cumulative arc-length coordinate attached by path sampling."""

    kx: float
    ky: float
    arc_length: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.kx) and math.isfinite(self.ky)):
            raise OutOfRange(f"Bloch components must be finite, got ({self.kx!r}, {self.ky!r})")

    @property
    def k_par(self) -> float:
        return math.hypot(self.kx, self.ky)

    @property
    def inside_light_cone(self) -> bool:
        return self.k_par < WAVENUMBER


def as_bloch(value) -> BlochVector:
    """Coerce a BlochVector or a 2-sequence of floats into a BlochVector."""
    if isinstance(value, BlochVector):
        return value
    kx, ky = value
    return BlochVector(float(kx), float(ky))


@dataclass(frozen=True)
class DriveField:
    """Control-field drive: Rabi frequency (complex allowed) and detuning."""

    omega_c: complex = 0.0
    delta_c: float = 0.0

    def __post_init__(self):
        if not math.isfinite(abs(complex(self.omega_c))):
            raise OutOfRange(f"omega_c must be finite, got {self.omega_c!r}")
        if not math.isfinite(self.delta_c):
            raise OutOfRange(f"delta_c must be finite, got {self.delta_c!r}")


def incidence_bloch(geometry: ProbeGeometry, config: SystemConfig) -> BlochVector:
    """In-plane Bloch vector selected by the incident probe direction."""
    k_in = config.wavenumber * math.sin(geometry.theta)
    if geometry.plane == "xz":
        return BlochVector(k_in, 0.0)
    return BlochVector(0.0, k_in)


def zone_boundary(config: SystemConfig) -> float:
    """Half-width pi/d of the first Brillouin zone."""
    return math.pi / config.lattice_constant


def bz_path(waypoints, samples_per_segment, config: SystemConfig) -> list[BlochVector]:
    """Sample a piecewise-linear path through the first Brillouin zone.

    Each segment contributes samples_per_segment points including both of
    its endpoints, and the shared point at an interior junction is emitted
    once. Waypoints are hit exactly (no interpolation rounding on the
    corners) and every emitted point carries the cumulative arc length, so
    a closed path ends with a final sample that repeats the starting
    wavevector at nonzero arc length.
    """
    if samples_per_segment < 2:
        raise OutOfRange(f"need at least 2 samples per segment, got {samples_per_segment}")
    pts = [as_bloch(w) for w in waypoints]
    if len(pts) < 2:
        raise OutOfZone("a path needs at least two waypoints")
    bound = zone_boundary(config) * (1.0 + 1e-9)
    for w in pts:
        if abs(w.kx) > bound or abs(w.ky) > bound:
            raise OutOfZone(
                f"waypoint ({w.kx}, {w.ky}) exceeds the zone boundary {zone_boundary(config)}"
            )
    out: list[BlochVector] = []
    arc = 0.0
    ts = np.linspace(0.0, 1.0, int(samples_per_segment))
    for a, b in zip(pts[:-1], pts[1:]):
        seg = math.hypot(b.kx - a.kx, b.ky - a.ky)
        start = 1 if out else 0
        for t in ts[start:]:
            if t == 0.0:
                kx, ky = a.kx, a.ky
            elif t == 1.0:
                kx, ky = b.kx, b.ky
            else:
                kx = a.kx + t * (b.kx - a.kx)
                ky = a.ky + t * (b.ky - a.ky)
            out.append(BlochVector(kx, ky, arc + t * seg))
        arc += seg
    return out


_BZ_CORNERS = {
    "G": (0.0, 0.0),
    "X": (1.0, 0.0),
    "Y": (0.0, 1.0),
    "M": (1.0, 1.0),
}


def named_bz_waypoints(letters: str, config: SystemConfig) -> list[BlochVector]:
    """Translate a symmetry-point string like "GXMG" into zone waypoints."""
    b = zone_boundary(config)
    points = []
    for c in letters:
        key = c.upper()
        if key not in _BZ_CORNERS:
            raise OutOfRange(f"unknown symmetry point {c!r}, use G, X, Y or M")
        fx, fy = _BZ_CORNERS[key]
        points.append(BlochVector(fx * b, fy * b))
    return points


@dataclass(frozen=True)
class RunSettings:
    """One bundle of everything a run needs: array, incidence, control field."""

    config: SystemConfig
    geometry: ProbeGeometry
    drive: DriveField


_SETTINGS_KEYS = (
    "lattice_constant",
    "gamma_r",
    "polarization",
    "theta",
    "plane",
    "omega_c",
    "delta_c",
)


def settings_from_mapping(raw: dict) -> RunSettings:
    """Build RunSettings from a flat mapping with the documented keys."""
    unknown = sorted(set(raw) - set(_SETTINGS_KEYS))
    if unknown:
        raise OutOfRange(f"unknown settings keys {unknown}; allowed: {list(_SETTINGS_KEYS)}")
    config = make_config(
        raw.get("lattice_constant", 0.1),
        raw.get("gamma_r", 0.3),
        raw.get("polarization", "z"),
    )
    geometry = ProbeGeometry(float(raw.get("theta", 0.0)), raw.get("plane", "xz"))
    drive = DriveField(raw.get("omega_c", 0.0), float(raw.get("delta_c", 0.0)))
    return RunSettings(config, geometry, drive)


def read_settings_mapping(path) -> dict:
    """Raw TOML settings mapping, for callers that merge overrides first."""
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def load_settings(path) -> RunSettings:
    """Read RunSettings from a TOML file (all values in reduced units)."""
    return settings_from_mapping(read_settings_mapping(path))
