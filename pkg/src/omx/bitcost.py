"""Energy cost of encoding one classical bit on a coherent optical state.

The modulator imprints ``h sin(omega_m t + phi)`` on the cavity phase while a
coherent state leaks out.  Two encodings (phi = 0 and phi = pi) give two
output coherent states whose overlap sets the Helstrom-Holevo error bound.
Everything here is in units of the mechanical frequency: ``ratio_k`` is
kappa/omega_m and ``ratio_g`` is g0/omega_m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_j_signed, truncation_order
from .errors import DomainError
from .units import HBAR

__all__ = [
    "EncodingProblem",
    "PhononSearch",
    "waveform_overlap",
    "encoding_fidelity",
    "helstrom_error",
    "error_probability",
    "required_phonons",
    "phonons_slow_limit",
    "phonons_fast_limit",
    "e_bit_slow",
    "e_bit_fast",
    "e_bit_numeric",
    "FAST_LIMIT_H",
]

# modulation index with J_0(2h) ~ 1/2, quoted as the fast-limit operating point
FAST_LIMIT_H = 0.76


@dataclass(frozen=True)
class EncodingProblem:
    alpha0_sq: float = 1.0
    ratio_g: float = 5e-5
    ratio_k: float = 1.0
    target_pe: float = 0.1

    def __post_init__(self):
        if not self.alpha0_sq > 0:
            raise DomainError("alpha0_sq must be positive")
        if not (self.ratio_g > 0 and self.ratio_k > 0):
            raise DomainError("ratio_g and ratio_k must be positive")
        if not 0 < self.target_pe <= 0.5:
            raise DomainError("target error probability must lie in (0, 0.5]")


@dataclass(frozen=True)
class PhononSearch:
    """Outcome of :func:`required_phonons`.

    ``reached`` is False when no grid point up to ``n_max`` met the target;
    ``n_phon`` is then NaN and ``pe_min`` is the best error found.
    """

    n_phon: float
    reached: bool
    pe_at_solution: float
    pe_min: float
    n_max: float
    bracket_monotone: bool
    evaluations: int


def waveform_overlap(h: float, ratio_k: float, phases: tuple[float, float] = (0.0, math.pi)) -> complex:
    """Commutator [A_phi, A_phi'^dagger] between the two output mode operators.

    Jacobi-Anger turns the exponential of the phase difference into a Bessel
    sum, and each term integrates against the exponential decay in closed
    form: sum_n J_n(a h) e^{i n theta} kappa/(kappa - i n omega_m).
    """
    if h < 0:
        raise DomainError("modulation index must be non-negative")
    if not ratio_k > 0:
        raise DomainError("ratio_k must be positive")
    phi, phi_p = phases
    # sin(t+phi) - sin(t+phi') = a sin(t + theta)
    a = 2.0 * math.sin((phi - phi_p) / 2.0)
    theta = (phi + phi_p) / 2.0 + math.pi / 2.0
    x = a * h
    if x == 0.0:
        return 1.0 + 0.0j
    orders, jn = bessel_j_signed(x, truncation_order(x))
    terms = jn * np.exp(1j * orders * theta) * ratio_k / (ratio_k - 1j * orders)
    return complex(terms.sum())


def encoding_fidelity(alpha0_sq: float, overlap: complex) -> float:
    """|<Psi_0|Psi_pi>|^2 for output coherent states with mean photon number alpha0_sq."""
    if abs(overlap) > 1.0 + 1e-9:
        raise DomainError(f"|overlap| = {abs(overlap)} exceeds 1")
    return math.exp(-2.0 * alpha0_sq * (1.0 - overlap.real))


def helstrom_error(fidelity: float) -> float:
    """Minimum error for two equiprobable pure states with the given fidelity."""
    if not 0.0 <= fidelity <= 1.0:
        raise DomainError(f"fidelity must lie in [0, 1], got {fidelity}")
    return 0.5 * (1.0 - math.sqrt(1.0 - fidelity))


def error_probability(n_phon: float, prob: EncodingProblem) -> float:
    h = prob.ratio_g * math.sqrt(n_phon)
    k = waveform_overlap(h, prob.ratio_k)
    return helstrom_error(encoding_fidelity(prob.alpha0_sq, k))


def phonons_slow_limit(prob: EncodingProblem) -> float:
    """n_phon = kappa^2 / (4 g0^2), where g0 sqrt(n) = kappa/2."""
    return prob.ratio_k**2 / (4.0 * prob.ratio_g**2)


def phonons_fast_limit(prob: EncodingProblem, h: float = FAST_LIMIT_H) -> float:
    return h**2 / prob.ratio_g**2


def required_phonons(prob: EncodingProblem, points_per_decade: int = 40,
                     rtol: float = 1e-3) -> PhononSearch:
    """Smallest phonon number whose Helstrom error reaches ``prob.target_pe``.

    P_e(n) is scanned on a log grid from 1 up to ten times the larger of the
    two closed-form limits; the first grid crossing is then bisected.  P_e is
    not globally monotone at large h, so the first crossing is what counts.
    """
    if prob.target_pe >= 0.5:
        return PhononSearch(0.0, True, 0.5, 0.5, 0.0, True, 0)

    n_max = 10.0 * max(phonons_slow_limit(prob), prob.ratio_g**-2 / 2.0)
    decades = math.log10(n_max)
    grid = np.logspace(0.0, decades, max(2, int(math.ceil(decades * points_per_decade)) + 1))
    evals = 0
    lo, p_lo = 0.0, 0.5
    pe_min = 0.5
    hi = None
    for n in grid:
        p = error_probability(n, prob)
        evals += 1
        pe_min = min(pe_min, p)
        if p <= prob.target_pe:
            hi, p_hi = n, p
            break
        lo, p_lo = n, p
    if hi is None:
        return PhononSearch(math.nan, False, math.nan, pe_min, n_max, True, evals)

    monotone = True
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        p = error_probability(mid, prob)
        evals += 1
        if not p_hi - 1e-12 <= p <= p_lo + 1e-12:
            monotone = False
        if p <= prob.target_pe:
            hi, p_hi = mid, p
        else:
            lo, p_lo = mid, p
    return PhononSearch(hi, True, p_hi, min(pe_min, p_hi), n_max, monotone, evals)


def e_bit_slow(omega_m: float, kappa: float, g0: float, eta_m: float) -> float:
    """Bit energy for kappa >> omega_m (J)."""
    _check_rates(omega_m, kappa, g0, eta_m)
    return HBAR * omega_m * kappa**2 / (4.0 * g0**2 * eta_m)


def e_bit_fast(omega_m: float, g0: float, eta_m: float) -> float:
    """Bit energy for kappa << omega_m (J)."""
    _check_rates(omega_m, 1.0, g0, eta_m)
    return HBAR * omega_m**3 / (2.0 * g0**2 * eta_m)


def e_bit_numeric(prob: EncodingProblem, omega_m: float, eta_m: float) -> float:
    res = required_phonons(prob)
    if not res.reached:
        return math.nan
    return HBAR * omega_m * res.n_phon / eta_m


def _check_rates(omega_m, kappa, g0, eta_m):
    if not (omega_m > 0 and kappa > 0 and g0 > 0):
        raise DomainError("rates must be positive")
    if not 0 < eta_m <= 1:
        raise DomainError(f"need 0 < eta_m <= 1, got {eta_m}")
