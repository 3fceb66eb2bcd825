"""Unit handling at the configuration boundary.

Everything user-facing is ordinary frequency (Hz) and SI powers; the physics
modules work in angular frequency (rad/s).  The helpers here are the only place
where 2*pi and dBm conversions happen.
"""

from __future__ import annotations

import math
import re

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR

TWO_PI = 2.0 * math.pi

__all__ = [
    "HBAR",
    "SPEED_OF_LIGHT",
    "TWO_PI",
    "UnitError",
    "to_angular",
    "to_hz",
    "dbm_to_w",
    "w_to_dbm",
    "db_to_ratio",
    "ratio_to_db",
    "wavelength_to_angular",
    "parse_quantity",
]


class UnitError(ValueError):
    """A quantity string could not be parsed or has the wrong dimension."""


def to_angular(f_hz):
    return TWO_PI * f_hz


def to_hz(omega):
    return omega / TWO_PI


def dbm_to_w(p_dbm):
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def w_to_dbm(p_w):
    return 10.0 * math.log10(p_w / 1e-3)


def db_to_ratio(x_db):
    return 10.0 ** (x_db / 10.0)


def ratio_to_db(x):
    return 10.0 * math.log10(x)


def wavelength_to_angular(wavelength_m: float) -> float:
    """Vacuum wavelength (m) to optical angular frequency (rad/s)."""
    if wavelength_m <= 0:
        raise UnitError(f"wavelength must be positive, got {wavelength_m}")
    return TWO_PI * SPEED_OF_LIGHT / wavelength_m


_PREFIX = {
    "f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "μ": 1e-6,
    "m": 1e-3, "": 1.0, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12,
}

# unit symbol -> dimension
_BASE = {
    "Hz": "frequency",
    "W": "power",
    "V": "voltage",
    "ohm": "impedance",
    "Ω": "impedance",
    "J": "energy",
    "s": "time",
    "m": "length",
}

_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d].*?)?\s*$")


def _split_unit(unit: str) -> tuple[float, str]:
    if unit in _BASE:
        return 1.0, unit
    for base in sorted(_BASE, key=len, reverse=True):
        if unit.endswith(base):
            prefix = unit[: -len(base)]
            if prefix in _PREFIX:
                return _PREFIX[prefix], base
    raise UnitError(f"unknown unit {unit!r}")


def parse_quantity(value, dimension: str | None = None) -> float:
    """Parse ``"1210 MHz"``, ``"3.3 uW"``, ``"-155 dBm"`` into an SI float.

    Bare numbers are only accepted when ``dimension`` is ``None`` or
    ``"dimensionless"``; a dimensional field given without a unit is an error,
    never a silent default.  ``dBm`` parses as power.
    """
    if isinstance(value, bool):
        raise UnitError(f"boolean is not a quantity: {value!r}")
    if isinstance(value, (int, float)):
        if dimension not in (None, "dimensionless"):
            raise UnitError(f"{dimension} value {value!r} needs an explicit unit")
        return float(value)
    if not isinstance(value, str):
        raise UnitError(f"cannot parse quantity from {type(value).__name__}")
    m = _QTY.match(value)
    if m is None:
        raise UnitError(f"malformed quantity {value!r}")
    number = float(m.group(1))
    unit = (m.group(2) or "").strip()
    if not unit:
        if dimension not in (None, "dimensionless"):
            raise UnitError(f"{dimension} value {value!r} needs an explicit unit")
        return number
    if unit == "dBm":
        dim, si = "power", dbm_to_w(number)
    elif unit == "dB":
        dim, si = "dimensionless", db_to_ratio(number)
    elif unit == "%":
        dim, si = "dimensionless", number / 100.0
    else:
        scale, base = _split_unit(unit)
        dim, si = _BASE[base], number * scale
    if dimension is not None and dim != dimension:
        raise UnitError(f"expected {dimension}, got {dim} in {value!r}")
    return si
