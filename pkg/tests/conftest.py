import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from omx.model import SidebandResolutionWarning

settings.register_profile("omx", derandomize=True, deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("omx")


@pytest.fixture(autouse=True)
def _quiet_sideband_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SidebandResolutionWarning)
        yield


@pytest.fixture
def device():
    """Reported operating point, angular units."""
    from omx.model import DeviceParams, MechanicalMode, OpticalCavity
    from omx.units import TWO_PI, wavelength_to_angular

    cav = OpticalCavity(wavelength_to_angular(1550e-9), TWO_PI * 1210e6, TWO_PI * 800e6)
    mech = MechanicalMode(TWO_PI * 1.85e9, TWO_PI * 1.93e6, TWO_PI * 8.6e3)
    return DeviceParams(cav, mech, TWO_PI * 70e3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
