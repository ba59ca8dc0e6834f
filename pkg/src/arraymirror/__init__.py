"""Cooperative optical response of a square subwavelength atomic array.

The array's dipoles form collective Bloch modes with a cooperative shift
and decay rate set by lattice sums of the free-space field propagator. A
ladder-type control field dresses each mode into two decaying resonances,
and the array then acts as a tunable dual-band mirror for polarized plane
waves. This package computes the mode dispersion, the dressed
susceptibility, polarization-resolved reflection and transmission, and
the diffraction-order thresholds, all in reduced units (wavelength = 1,
single-atom linewidth = 1).
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ArrayMirrorError,
    BadPolarization,
    Degenerate,
    DegeneratePoles,
    IoError,
    NoConvergence,
    NoSteadyState,
    NotDualBand,
    OutOfRange,
    OutOfZone,
    ZeroDisplacement,
)
from .config import (  # noqa: E402
    GAMMA_E,
    THETA_MAX,
    WAVELENGTH,
    WAVENUMBER,
    BlochVector,
    DriveField,
    ProbeGeometry,
    RunSettings,
    SystemConfig,
    bz_path,
    incidence_bloch,
    load_settings,
    make_config,
    named_bz_waypoints,
    settings_from_mapping,
    zone_boundary,
)
from .greens import (  # noqa: E402
    AccelParams,
    ModePoint,
    OrderTerm,
    delta_k,
    eta,
    free_green,
    gamma_k,
    gamma_k_realspace,
    reciprocal_orders,
)
from .bands import (  # noqa: E402
    BandTable,
    band_structure,
    directional_mode,
    mode_vs_angle,
    mode_vs_lattice,
)
from .eit import (  # noqa: E402
    DressedPoles,
    EitParams,
    SteadyState,
    beta_split,
    chi_reduced,
    dressed_poles,
    eit_params,
    steady_state_numeric,
    susceptibility_spectrum,
    xi,
)
from .scattering import (  # noqa: E402
    BandDescriptor,
    DiffractionThreshold,
    OrderContribution,
    PolarizationBasis,
    ScatteringResult,
    diffraction_threshold,
    extract_bands,
    order_contribution_xx,
    rt_spectrum,
    scattering_matrices,
    sp_basis,
    spectra_sweep,
)
from .tables import SweepTable, thread_budget, write_table  # noqa: E402
from .verify import CheckResult, verify_suite  # noqa: E402
