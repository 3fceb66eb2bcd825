"""Closed-form linear response of a piezo-optomechanical transducer.

All rates are angular (rad/s).  The detuning convention is
``delta = omega_c - omega_p``, so a blue-detuned pump has ``delta < 0``.

The scattering parameters use the sideband-resolved approximation: only the
optical sideband that is resonant with the cavity is kept (the lower one for a
blue pump, the upper one for a red pump).  The mechanical port is the effective
microwave channel with decay rate ``gamma_mu``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError, LasingError
from .units import HBAR, TWO_PI

Side = Literal["red", "blue"]

__all__ = [
    "OpticalCavity",
    "MechanicalMode",
    "DeviceParams",
    "PumpState",
    "ThreeModeParams",
    "SidebandResolutionWarning",
    "intracavity_photons",
    "s_oo",
    "soo_response",
    "s_oe",
    "s_eo",
    "total_efficiency",
    "internal_gain",
    "three_mode_efficiency",
    "gamma_mu_mismatch",
    "qubit_coupling",
    "energy_per_qubit",
    "energy_per_qubit_rates",
]


class SidebandResolutionWarning(UserWarning):
    """omega_m <= kappa: the neglected counter-rotating sideband is not small."""


@dataclass(frozen=True)
class OpticalCavity:
    omega_c: float
    kappa: float
    kappa_e: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if not 0 < self.kappa_e <= self.kappa:
            raise DomainError(f"need 0 < kappa_e <= kappa, got kappa_e={self.kappa_e}, kappa={self.kappa}")
        if self.omega_c < 0:
            raise DomainError("omega_c must be non-negative")

    @property
    def kappa_i(self) -> float:
        return self.kappa - self.kappa_e

    @property
    def eta_o(self) -> float:
        return self.kappa_e / self.kappa

    @classmethod
    def from_hz(cls, f_c, kappa_hz, kappa_e_hz):
        return cls(TWO_PI * f_c, TWO_PI * kappa_hz, TWO_PI * kappa_e_hz)


@dataclass(frozen=True)
class MechanicalMode:
    omega_m: float
    gamma: float
    gamma_mu: float
    gamma_e: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if not 0 <= self.gamma_mu <= self.gamma:
            raise DomainError(f"need 0 <= gamma_mu <= gamma, got {self.gamma_mu}")
        if self.gamma_e < 0:
            raise DomainError("gamma_e must be non-negative")
        if not self.omega_m > 0:
            raise DomainError("omega_m must be positive")

    @property
    def eta_m(self) -> float:
        return self.gamma_mu / self.gamma

    @classmethod
    def from_hz(cls, f_m, gamma_hz, gamma_mu_hz, gamma_e_hz=0.0):
        return cls(TWO_PI * f_m, TWO_PI * gamma_hz, TWO_PI * gamma_mu_hz, TWO_PI * gamma_e_hz)


@dataclass(frozen=True)
class DeviceParams:
    """One transducer: optical cavity, mechanical mode and their coupling.

    Attributes
    ----------
    g0 : float
        Vacuum optomechanical coupling (rad/s).
    eta_oc : float
        Fiber-to-chip optical coupling efficiency.
    z0 : float
        Microwave line impedance in ohm.
    """

    cavity: OpticalCavity
    mech: MechanicalMode
    g0: float
    eta_oc: float = 1.0
    z0: float = 50.0

    def __post_init__(self):
        if not self.g0 > 0:
            raise DomainError("g0 must be positive")
        if not 0 < self.eta_oc <= 1:
            raise DomainError(f"need 0 < eta_oc <= 1, got {self.eta_oc}")
        if not self.z0 > 0:
            raise DomainError("z0 must be positive")

    @property
    def c0(self) -> float:
        """Single-photon cooperativity 4 g0^2 / (kappa gamma)."""
        return 4.0 * self.g0**2 / (self.cavity.kappa * self.mech.gamma)

    @property
    def eta_e(self) -> float:
        return self.eta_oc * self.cavity.eta_o * self.mech.eta_m

    @property
    def sideband_resolved(self) -> bool:
        return self.mech.omega_m > self.cavity.kappa


@dataclass(frozen=True)
class PumpState:
    """Optical pump operating point.

    Build with :meth:`from_power` or :meth:`from_photons` so that ``g_eff``
    and ``coop`` stay consistent with the device.
    """

    delta: float
    p_in: float
    n_c: float
    g_eff: float
    coop: float

    def __post_init__(self):
        if self.n_c < 0 or self.g_eff < 0 or self.coop < 0:
            raise DomainError("pump photon number, coupling and cooperativity must be >= 0")

    @property
    def side(self) -> Side:
        return "red" if self.delta > 0 else "blue"

    @classmethod
    def from_photons(cls, dev: DeviceParams, delta: float, n_c: float, p_in: float = math.nan):
        if n_c < 0:
            raise DomainError("n_c must be non-negative")
        g_eff = dev.g0 * math.sqrt(n_c)
        return cls(delta, p_in, n_c, g_eff, dev.c0 * n_c)

    @classmethod
    def from_power(cls, dev: DeviceParams, delta: float, p_in: float, omega_p: float | None = None):
        if omega_p is None:
            omega_p = dev.cavity.omega_c - delta
        n_c = intracavity_photons(dev.cavity, delta, p_in, omega_p)
        return cls.from_photons(dev, delta, n_c, p_in=p_in)


@dataclass(frozen=True)
class ThreeModeParams:
    """OMC mechanics coupled to a lossy IDT electromechanical mode.

    ``g_bc`` couples the two mechanical modes, ``kappa_c``/``kappa_ce`` are the
    IDT mode's total and external (50 ohm) decay rates and ``delta_bc`` their
    frequency mismatch, all in rad/s.
    """

    g_bc: float
    kappa_c: float
    kappa_ce: float
    delta_bc: float = 0.0

    def __post_init__(self):
        if not 0 < self.kappa_ce <= self.kappa_c:
            raise DomainError("need 0 < kappa_ce <= kappa_c")
        if self.g_bc < 0:
            raise DomainError("g_bc must be non-negative")

    def c_bc(self, gamma: float) -> float:
        return 4.0 * self.g_bc**2 / (self.kappa_c * gamma)


def intracavity_photons(cavity: OpticalCavity, delta: float, p_in: float, omega_p: float) -> float:
    """Steady-state pump photon number n_c = |alpha_0|^2."""
    if not omega_p > 0:
        raise DomainError(f"pump frequency must be positive, got {omega_p}")
    if p_in < 0:
        raise DomainError(f"pump power must be non-negative, got {p_in}")
    flux = p_in / (HBAR * omega_p)
    return cavity.kappa_e * flux / (delta**2 + (cavity.kappa / 2.0) ** 2)


def _check_resolved(dev: DeviceParams):
    if not dev.sideband_resolved:
        warnings.warn(
            f"omega_m/kappa = {dev.mech.omega_m / dev.cavity.kappa:.3g} <= 1; "
            "the sideband-resolved approximation is poor",
            SidebandResolutionWarning,
            stacklevel=3,
        )


def _alpha0(dev: DeviceParams, pump: PumpState) -> complex:
    # alpha_0 = -sqrt(kappa_e) alpha_in / (i delta + kappa/2), alpha_in real
    phase = -1.0 / (1j * pump.delta + dev.cavity.kappa / 2.0)
    return math.sqrt(pump.n_c) * phase / abs(phase)


def _susceptibilities(dev: DeviceParams, pump: PumpState, omega, side: Side):
    kappa, gamma, omega_m = dev.cavity.kappa, dev.mech.gamma, dev.mech.omega_m
    omega = np.asarray(omega, dtype=float)
    if side == "blue":
        chi_c = 1j * (pump.delta + omega) + kappa / 2.0
        chi_m = 1j * (omega - omega_m) + gamma / 2.0
        denom = chi_c * chi_m - pump.g_eff**2
    else:
        chi_c = 1j * (pump.delta - omega) + kappa / 2.0
        chi_m = 1j * (omega_m - omega) + gamma / 2.0
        denom = chi_c * chi_m + pump.g_eff**2
    return chi_c, chi_m, denom


def soo_response(omega, delta, kappa, kappa_e, g_eff=0.0, omega_m=1.0, gamma=1.0,
                 side: Side = "blue"):
    """Sideband reflection from bare numbers; any consistent frequency unit."""
    omega = np.asarray(omega, dtype=float)
    if side == "blue":
        chi_c = 1j * (delta + omega) + kappa / 2.0
        mech = -(g_eff**2) / (1j * (omega - omega_m) + gamma / 2.0)
    else:
        chi_c = 1j * (delta - omega) + kappa / 2.0
        mech = g_eff**2 / (1j * (omega_m - omega) + gamma / 2.0)
    return 1.0 - kappa_e / (chi_c + mech)


def s_oo(dev: DeviceParams, pump: PumpState, omega, side: Side | None = None):
    """Optical-to-optical sideband reflection, including the direct term 1.

    ``omega`` is the modulation frequency (rad/s, scalar or array).
    """
    _check_resolved(dev)
    return soo_response(omega, pump.delta, dev.cavity.kappa, dev.cavity.kappa_e, pump.g_eff,
                        dev.mech.omega_m, dev.mech.gamma, side or pump.side)


def s_oe(dev: DeviceParams, pump: PumpState, omega, side: Side | None = None):
    """Microwave-to-optical conversion amplitude."""
    side = side or pump.side
    _check_resolved(dev)
    _, _, denom = _susceptibilities(dev, pump, omega, side)
    amp = math.sqrt(dev.cavity.kappa_e * dev.mech.gamma_mu)
    return amp * 1j * dev.g0 * _alpha0(dev, pump) / denom


def s_eo(dev: DeviceParams, pump: PumpState, omega, side: Side | None = None):
    """Optical-to-microwave conversion amplitude."""
    side = side or pump.side
    _check_resolved(dev)
    _, _, denom = _susceptibilities(dev, pump, omega, side)
    amp = math.sqrt(dev.cavity.kappa_e * dev.mech.gamma_mu)
    sign = -1.0 if side == "blue" else 1.0
    return sign * amp * 1j * dev.g0 * np.conj(_alpha0(dev, pump)) / denom


def internal_gain(coop: float) -> float:
    """Blue-pump internal gain 4C/(1-C)^2."""
    if coop < 0:
        raise DomainError("cooperativity must be non-negative")
    if coop >= 1:
        raise LasingError(f"C = {coop} >= 1: phonon lasing, linear theory does not apply")
    return 4.0 * coop / (1.0 - coop) ** 2


def total_efficiency(dev: DeviceParams, coop: float, side: Side) -> float:
    """Fiber-referred conversion efficiency at |delta| = omega_m."""
    if coop < 0:
        raise DomainError("cooperativity must be non-negative")
    if side == "blue":
        return dev.eta_e * internal_gain(coop)
    if side == "red":
        return dev.eta_e * 4.0 * coop / (1.0 + coop) ** 2
    raise DomainError(f"side must be 'red' or 'blue', got {side!r}")


def three_mode_efficiency(dev: DeviceParams, tm: ThreeModeParams, coop_ab: float, side: Side) -> float:
    """Peak efficiency with the IDT resonance kept as an explicit third mode.

    The fiber coupling ``dev.eta_oc`` multiplies the on-chip result so that the
    weak-coupling limit matches :func:`total_efficiency`.
    """
    if coop_ab < 0:
        raise DomainError("cooperativity must be non-negative")
    c_bc = tm.c_bc(dev.mech.gamma)
    if side == "blue":
        pole = 1.0 - coop_ab + c_bc
        if pole <= 0:
            raise LasingError(f"1 - C_ab + C_bc = {pole} <= 0: lasing")
    elif side == "red":
        pole = 1.0 + coop_ab + c_bc
    else:
        raise DomainError(f"side must be 'red' or 'blue', got {side!r}")
    return (dev.eta_oc * dev.cavity.eta_o * (tm.kappa_ce / tm.kappa_c)
            * 4.0 * coop_ab * c_bc / pole**2)


def gamma_mu_mismatch(tm: ThreeModeParams) -> float:
    """Effective microwave decay rate of the OMC mode for detuned IDT."""
    return 4.0 * tm.g_bc**2 * tm.kappa_ce / (4.0 * tm.delta_bc**2 + tm.kappa_c**2)


def qubit_coupling(dev: DeviceParams, z_c: float) -> float:
    """Coupling rate to a resonator of characteristic impedance ``z_c``."""
    if not z_c > 0:
        raise DomainError("z_c must be positive")
    return math.sqrt(dev.mech.gamma_mu * dev.mech.omega_m) * math.sqrt(z_c / dev.z0) / 2.0


def energy_per_qubit(dev: DeviceParams) -> float:
    """Pump energy dissipated per converted qubit at C = 1 (J)."""
    cav = dev.cavity
    return energy_per_qubit_rates(cav.omega_c, cav.kappa, cav.eta_o, dev.g0, dev.mech.eta_m)


def energy_per_qubit_rates(omega_c: float, kappa: float, eta_o: float, g0: float,
                           eta_m: float) -> float:
    """:func:`energy_per_qubit` from bare rates; kappa_i = kappa (1 - eta_o)."""
    if eta_m == 0:
        return math.inf
    kappa_i = kappa * (1.0 - eta_o)
    return HBAR * omega_c * kappa * kappa_i / (4.0 * g0**2 * eta_o * eta_m)
