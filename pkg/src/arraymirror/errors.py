"""Exception types shared across the package.

Validation problems (bad parameters, malformed requests) and numerical
failures (sums or integrations that refuse to converge) are kept as
distinct subclasses so callers can map them to different exit codes.
"""


class ArrayMirrorError(Exception):
    """Base class for every package-specific error."""


class OutOfRange(ArrayMirrorError):
    """A parameter lies outside its validated range."""


class BadPolarization(ArrayMirrorError):
    """Dipole orientation could not be normalized to a real unit 3-vector."""


class OutOfZone(ArrayMirrorError):
    """A path waypoint falls outside the first Brillouin zone."""


class ZeroDisplacement(ArrayMirrorError):
    """The free-space tensor was requested at zero separation."""


class NoConvergence(ArrayMirrorError):
    """An accelerated lattice sum missed its error tolerance."""


class Degenerate(ArrayMirrorError):
    """Susceptibility denominator vanished, the probe sits on an undamped pole."""


class DegeneratePoles(ArrayMirrorError):
    """Dressed poles coincide, the two-pole weight decomposition is ill conditioned."""


class NotDualBand(ArrayMirrorError):
    """Reflection trace does not contain two qualifying maxima."""


class NoSteadyState(ArrayMirrorError):
    """Density-matrix integration did not settle within its time budget."""


class IoError(ArrayMirrorError):
    """A result table could not be written."""
