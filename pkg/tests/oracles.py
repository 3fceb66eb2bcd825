"""Brute-force reference computations used only by the tests."""

import math
import warnings

import numpy as np
from scipy import integrate


def overlap_by_quadrature(h, ratio_k, phases=(0.0, math.pi), tail=1e-13):
    """Integrate kappa e^{-kappa t} e^{i h [sin(t+phi) - sin(t+phi')]} dt, omega_m = 1.

    Adaptive quadrature one mechanical period at a time until the exponential
    envelope drops below ``tail``.
    """
    phi, phi_p = phases
    k = ratio_k
    t_end = -math.log(tail) / k
    edges = np.arange(0.0, t_end + 2 * math.pi, 2 * math.pi)
    if len(edges) < 50:
        # fast decay: slice the envelope instead of the period
        edges = np.linspace(0.0, t_end, 200)

    def re(t):
        return k * math.exp(-k * t) * math.cos(h * (math.sin(t + phi) - math.sin(t + phi_p)))

    def im(t):
        return k * math.exp(-k * t) * math.sin(h * (math.sin(t + phi) - math.sin(t + phi_p)))

    total = 0.0 + 0.0j
    with warnings.catch_warnings():
        # tolerances sit at roundoff on slices where the envelope is tiny
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            r, _ = integrate.quad(re, a, b, epsabs=1e-15, epsrel=1e-12, limit=200)
            i, _ = integrate.quad(im, a, b, epsabs=1e-15, epsrel=1e-12, limit=200)
            total += r + 1j * i
    return total


def aom_reflection_by_ode(kappa, kappa_e, h, omega_mu, delta, periods=4):
    """Time-averaged reflection of a cavity whose detuning is swept as
    delta + h omega_mu cos(omega_mu t), by direct integration of the cavity
    amplitude equation with unit input."""
    from scipy.integrate import solve_ivp

    def rhs(t, y):
        a = y[0] + 1j * y[1]
        d = delta + h * omega_mu * math.cos(omega_mu * t)
        da = -(1j * d + kappa / 2.0) * a + math.sqrt(kappa_e)
        return [da.real, da.imag]

    period = 2 * math.pi / omega_mu
    t_settle = period * math.ceil(40.0 / kappa / period)
    t_end = t_settle + periods * period
    ts = np.linspace(t_settle, t_end, 4000 * periods + 1)
    sol = solve_ivp(rhs, (0.0, t_end), [0.0, 0.0], t_eval=ts, rtol=1e-10, atol=1e-12,
                    max_step=period / 200)
    a = sol.y[0] + 1j * sol.y[1]
    r = np.abs(1.0 - math.sqrt(kappa_e) * a) ** 2
    return integrate.trapezoid(r, ts) / (ts[-1] - ts[0])


def helstrom_by_density_matrices(overlap_amp):
    """Minimum error for two equiprobable pure states with the given inner
    product, from the trace norm of rho_0 - rho_1 in their two-dimensional span."""
    c = complex(overlap_amp)
    psi0 = np.array([1.0, 0.0], dtype=complex)
    psi1 = np.array([c, math.sqrt(max(1.0 - abs(c) ** 2, 0.0))], dtype=complex)
    diff = 0.5 * (np.outer(psi0, psi0.conj()) - np.outer(psi1, psi1.conj()))
    return 0.5 * (1.0 - np.abs(np.linalg.eigvalsh(diff)).sum())


def first_crossing_bruteforce(fn, target, n_lo, n_hi, num=20000):
    """Smallest n on a fine log grid with fn(n) <= target, refined by brentq."""
    from scipy.optimize import brentq

    grid = np.geomspace(n_lo, n_hi, num)
    prev = grid[0]
    for n in grid:
        if fn(n) <= target:
            if n == grid[0]:
                return n
            return brentq(lambda m: fn(m) - target, prev, n, rtol=1e-10)
        prev = n
    return math.nan
