"""Models, bit-cost bounds, fits and calibration for piezo-optomechanical transducers.

Submodules
----------
units        unit parsing and constants
model        scattering parameters and conversion efficiency
aom          acousto-optic modulation spectra and drive figures
bitcost      Helstrom-bound energy per bit
extraction   trace fits and synthetic data
calibration  measurement-chain arithmetic
records      device records and the figure-of-merit table
config, cli  run configuration and command line
"""

from .errors import ConfigError, DomainError, FitRejected, LasingError, ScanRejected
from .model import DeviceParams, MechanicalMode, OpticalCavity, PumpState
from .traces import Trace

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "FitRejected",
    "LasingError",
    "ScanRejected",
    "DeviceParams",
    "MechanicalMode",
    "OpticalCavity",
    "PumpState",
    "Trace",
]
