import math

import pytest
from hypothesis import HealthCheck, settings

from arraymirror import AccelParams

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def fast_accel():
    """Loose ladder for tests that exercise plumbing, not convergence.

    base_radius 8 keeps a shift evaluation around 50 ms at d = 0.1. The
    tolerance has to come up with it; grazing angles are off limits here.
    """
    return AccelParams(base_radius=8.0, tolerance=5e-2)


@pytest.fixture(scope="session")
def quarter_pi():
    return 0.25 * math.pi
