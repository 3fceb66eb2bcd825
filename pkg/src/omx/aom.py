"""Acousto-optic modulation: driven phonons, modulation index and the
time-averaged cavity reflection under phase modulation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_j_signed, truncation_order
from .errors import DomainError
from .model import DeviceParams, MechanicalMode, OpticalCavity
from .units import HBAR, TWO_PI

__all__ = [
    "DriveState",
    "phonons_from_drive",
    "modulation_index",
    "reflection_spectrum",
    "gamma_mu_from_h",
    "v_pi",
    "p_pi",
    "energy_per_bit_vpi",
]


@dataclass(frozen=True)
class DriveState:
    omega_mu: float
    p_mu: float
    n_phon: float
    h: float

    @classmethod
    def from_power(cls, dev: DeviceParams, omega_mu: float, p_mu: float) -> "DriveState":
        n = phonons_from_drive(dev.mech, omega_mu, p_mu)
        return cls(omega_mu, p_mu, n, modulation_index(dev.g0, n, omega_mu))


def phonons_from_drive(mech: MechanicalMode, omega_mu: float, p_mu: float) -> float:
    """Coherent phonon number for microwave power ``p_mu`` (W) at the IDT."""
    if p_mu < 0:
        raise DomainError("microwave power must be non-negative")
    if not omega_mu > 0:
        raise DomainError("drive frequency must be positive")
    flux = p_mu / (HBAR * omega_mu)
    return mech.gamma_mu * flux / ((mech.omega_m - omega_mu) ** 2 + (mech.gamma / 2.0) ** 2)


def modulation_index(g0: float, n_phon: float, omega_mu: float) -> float:
    if n_phon < 0:
        raise DomainError("phonon number must be non-negative")
    return g0 * math.sqrt(n_phon) / omega_mu


def reflection_spectrum(cavity: OpticalCavity, h: float, omega_mu: float, delta_grid,
                        nmax: int | None = None) -> np.ndarray:
    """DC reflection of a phase-modulated cavity versus detuning (rad/s).

    Sum over sidebands n of J_n(h)^2 |1 - kappa_e / (i(delta + n omega_mu) + kappa/2)|^2.
    """
    if h < 0:
        raise DomainError("modulation index must be non-negative")
    if nmax is None:
        nmax = truncation_order(h)
    orders, jn = bessel_j_signed(h, nmax)
    weights = jn**2
    delta = np.atleast_1d(np.asarray(delta_grid, dtype=float))
    shifted = delta[:, None] + orders[None, :] * omega_mu
    lor = np.abs(1.0 - cavity.kappa_e / (1j * shifted + cavity.kappa / 2.0)) ** 2
    out = lor @ weights
    return out if np.ndim(delta_grid) else out[0]


def gamma_mu_from_h(h: float, omega_mu: float, gamma: float, g0: float, p_mu: float) -> float:
    """Microwave decay rate implied by a modulation index measured on resonance."""
    if not p_mu > 0:
        raise DomainError("microwave power must be positive")
    if not h > 0:
        raise DomainError("modulation index must be positive")
    flux = p_mu / (HBAR * omega_mu)
    return h**2 * omega_mu**2 * gamma**2 / (4.0 * g0**2 * flux)


def v_pi(h: float, p_mu: float, z0: float = 50.0) -> float:
    """Drive amplitude (V) giving a pi excursion of the cavity phase (h = pi)."""
    if not h > 0:
        raise DomainError("modulation index must be positive")
    if not p_mu > 0:
        raise DomainError("microwave power must be positive")
    return math.pi * math.sqrt(2.0 * p_mu * z0) / h


def p_pi(v: float, z0: float = 50.0) -> float:
    return v**2 / (2.0 * z0)


def energy_per_bit_vpi(v: float, bandwidth_hz: float, z0: float = 50.0) -> float:
    """Rough energy per bit P_pi / (2 pi B) for bandwidth ``bandwidth_hz``."""
    return p_pi(v, z0) / (TWO_PI * bandwidth_hz)
