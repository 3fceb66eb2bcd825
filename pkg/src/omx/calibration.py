"""Measurement-chain arithmetic: raw instrument readings to photon fluxes.

Microwave-to-optical (oe) route::

    N_in,mu  = eta_cable * P_vna / (hbar omega_mu)
    G        = P_cal,mu / (P_cal,o / eta_out)
    N_out,o  = P_out,mu / (G hbar omega_c)
    eta_oe   = N_out,o / N_in,mu

Optical-to-microwave (eo) route::

    N_out,mu = P_mu,device / (hbar omega_mu),  P_mu,device = P_measured / eta_cable
    N_in,o   = P_pump * r / (hbar omega_c)
    eta_eo   = N_out,mu / N_in,o

``r`` is the optical sideband-to-pump ratio read off a tunable-filter scan.
Every function is homogeneous of degree zero in the powers.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import integrate, signal, stats

from .errors import ConfigError, DomainError, ScanRejected
from .traces import Trace, read_trace_csv
from .units import HBAR, TWO_PI, wavelength_to_angular

__all__ = [
    "ChainParams",
    "DetectionGain",
    "ScanPeaks",
    "microwave_input_flux",
    "microwave_output_flux",
    "optical_input_flux",
    "detection_gain",
    "oe_efficiency",
    "eo_efficiency",
    "eo_efficiency_from_power",
    "analyze_filter_scan",
    "sideband_ratio",
    "integrate_psd",
    "calibrate_oe",
    "calibrate_eo",
    "load_raw_set",
]


@dataclass(frozen=True)
class ChainParams:
    eta_cable: float = 0.575
    eta_out: float = 0.636
    z0: float = 50.0

    def __post_init__(self):
        for name in ("eta_cable", "eta_out"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise DomainError(f"{name} must lie in (0, 1], got {v}")
        if not self.z0 > 0:
            raise DomainError("z0 must be positive")


@dataclass(frozen=True)
class DetectionGain:
    """Microwave power at the analyzer per optical power at the fiber output."""

    gain: float

    def __post_init__(self):
        if not self.gain > 0:
            raise DomainError(f"detection gain must be positive, got {self.gain}")


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise DomainError(f"{k} must be positive, got {v}")


def microwave_input_flux(p_vna: float, omega_mu: float, chain: ChainParams) -> float:
    """Microwave photons per second arriving at the device."""
    if p_vna < 0:
        raise DomainError("microwave power must be non-negative")
    _positive(omega_mu=omega_mu)
    return chain.eta_cable * p_vna / (HBAR * omega_mu)


def microwave_output_flux(p_measured: float, omega_mu: float, chain: ChainParams) -> float:
    """Microwave photons per second leaving the device, from analyzer power."""
    if p_measured < 0:
        raise DomainError("microwave power must be non-negative")
    _positive(omega_mu=omega_mu)
    return p_measured / (chain.eta_cable * HBAR * omega_mu)


def optical_input_flux(p_pump_in: float, r: float, omega_c: float,
                       pump_correction: float = 1.0) -> float:
    """Sideband photons per second before the lensed fiber.

    ``pump_correction`` rescales the measured pump power; it is left to the
    caller because the share of power moved into the modulation sidebands
    depends on how the pump was measured.
    """
    _positive(p_pump_in=p_pump_in, omega_c=omega_c, pump_correction=pump_correction)
    if not 0 < r < 1:
        raise DomainError(f"sideband ratio must lie in (0, 1), got {r}")
    return p_pump_in * pump_correction * r / (HBAR * omega_c)


def detection_gain(p_cal_mu: float, p_cal_o: float, eta_out: float) -> DetectionGain:
    _positive(p_cal_mu=p_cal_mu, p_cal_o=p_cal_o)
    if not 0 < eta_out <= 1:
        raise DomainError(f"eta_out must lie in (0, 1], got {eta_out}")
    return DetectionGain(p_cal_mu / (p_cal_o / eta_out))


def oe_efficiency(p_out_mu: float, gain: DetectionGain, omega_c: float, flux_in_mu: float) -> float:
    _positive(p_out_mu=p_out_mu, omega_c=omega_c, flux_in_mu=flux_in_mu)
    flux_out_o = p_out_mu / (gain.gain * HBAR * omega_c)
    return flux_out_o / flux_in_mu


def eo_efficiency(s21_sq: float, p_eom_mu: float, chain: ChainParams, r: float,
                  p_pump_in: float, omega_c: float, omega_mu: float,
                  pump_correction: float = 1.0) -> float:
    """Optical-to-microwave efficiency from a VNA transmission measurement."""
    _positive(s21_sq=s21_sq, p_eom_mu=p_eom_mu)
    flux_out = microwave_output_flux(p_eom_mu * s21_sq, omega_mu, chain)
    return flux_out / optical_input_flux(p_pump_in, r, omega_c, pump_correction)


def eo_efficiency_from_power(p_mu_measured: float, chain: ChainParams, r: float,
                             p_pump_in: float, omega_c: float, omega_mu: float,
                             pump_correction: float = 1.0) -> float:
    """Optical-to-microwave efficiency from an integrated analyzer power."""
    _positive(p_mu_measured=p_mu_measured)
    flux_out = microwave_output_flux(p_mu_measured, omega_mu, chain)
    return flux_out / optical_input_flux(p_pump_in, r, omega_c, pump_correction)


# ------------------------------------------------------------- filter scan

@dataclass(frozen=True)
class ScanPeaks:
    dark: float
    threshold: float
    pump_at: float
    pump_level: float
    sideband_at: float
    sideband_level: float
    n_peaks: int

    @property
    def ratio(self) -> float:
        return (self.sideband_level - self.dark) / (self.pump_level - self.dark)


def _vertex(x, y, i):
    """Peak position and height from a parabola through three samples."""
    if i == 0 or i == len(y) - 1:
        return x[i], y[i]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2.0 * y1 + y2
    if den >= 0:
        return x[i], y1
    d = 0.5 * (y0 - y2) / den
    step = x[i + 1] - x[i] if d > 0 else x[i] - x[i - 1]
    return x[i] + d * step, y1 - 0.25 * (y0 - y2) * d


def analyze_filter_scan(scan: Trace, which: str = "largest") -> ScanPeaks:
    """Locate pump and sideband peaks in a filter transmission scan.

    The dark level is the 5th percentile of the scan.  Peaks are local maxima
    above dark + 3 * MAD that also stand out from the sample-to-sample
    noise by eight standard deviations.  The pump is the global maximum; peaks within three
    pump widths of it are ignored.  ``which`` picks the sideband: ``largest``,
    ``lower`` (largest below the pump) or ``upper``.
    """
    if np.iscomplexobj(scan.y):
        raise ScanRejected("filter scan must be real-valued")
    x = scan.x
    y = np.asarray(scan.y, dtype=float)
    dark = float(np.percentile(y, 5))
    spread = float(stats.median_abs_deviation(y, scale="normal"))
    span = float(y.max() - dark)
    if not span > 0:
        raise ScanRejected("flat scan")
    threshold = dark + max(3.0 * spread, 1e-9 * span)
    # tail ripples and noise maxima clear the height cut; an isolated Gaussian
    # maximum in a few thousand samples reaches about 7 sigma of prominence
    noise = float(stats.median_abs_deviation(np.diff(y), scale="normal")) / np.sqrt(2.0)
    idx, _ = signal.find_peaks(y, height=threshold, prominence=max(8.0 * noise, 1e-9 * span))
    if len(idx) == 0:
        raise ScanRejected("no peaks above the dark level")
    pump_i = int(idx[np.argmax(y[idx])])
    widths = signal.peak_widths(y, [pump_i], rel_height=0.5)[0]
    dx = float(np.median(np.diff(x)))
    half_window = 3.0 * max(float(widths[0]), 1.0) * dx
    pump_at, pump_level = _vertex(x, y, pump_i)
    others = [i for i in idx if abs(x[i] - x[pump_i]) > half_window]
    if which == "lower":
        others = [i for i in others if x[i] < x[pump_i]]
    elif which == "upper":
        others = [i for i in others if x[i] > x[pump_i]]
    elif which != "largest":
        raise DomainError(f"unknown sideband selector {which!r}")
    if not others:
        raise ScanRejected(f"fewer than 2 peaks above threshold {threshold:.3g}")
    sb_i = max(others, key=lambda i: y[i])
    sb_at, sb_level = _vertex(x, y, sb_i)
    return ScanPeaks(dark, threshold, float(pump_at), float(pump_level),
                     float(sb_at), float(sb_level), 1 + len(others))


def sideband_ratio(scan: Trace, which: str = "largest") -> float:
    """r = (V_sb - V_dark) / (V_pump - V_dark)."""
    return analyze_filter_scan(scan, which).ratio


# --------------------------------------------------------------------- PSD

def integrate_psd(psd: Trace, f_center: float, f_bw: float,
                  background: Trace | None = None) -> float:
    """Trapezoidal power (W) in f_center +/- 2 f_bw of a PSD in W/Hz.

    The band edges are linearly interpolated.  An optional background PSD is
    interpolated onto the same points and subtracted first.
    """
    _positive(f_bw=f_bw)
    lo, hi = f_center - 2.0 * f_bw, f_center + 2.0 * f_bw
    x = psd.x
    if lo < x[0] or hi > x[-1]:
        raise DomainError(f"band [{lo:.9g}, {hi:.9g}] Hz lies outside the trace span "
                          f"[{x[0]:.9g}, {x[-1]:.9g}] Hz")
    inside = (x > lo) & (x < hi)
    xs = np.concatenate(([lo], x[inside], [hi]))
    ys = np.interp(xs, x, np.asarray(psd.y, dtype=float))
    if background is not None:
        if lo < background.x[0] or hi > background.x[-1]:
            raise DomainError("band lies outside the background trace span")
        ys = ys - np.interp(xs, background.x, np.asarray(background.y, dtype=float))
    return float(integrate.trapezoid(ys, xs))


# ------------------------------------------------------------------ reports

def _omega_c(raw):
    if "wavelength_m" in raw:
        return wavelength_to_angular(raw["wavelength_m"])
    return TWO_PI * raw["f_c_hz"]


def calibrate_oe(raw: dict) -> dict:
    """Microwave-to-optical efficiency with every intermediate quantity."""
    chain = ChainParams(raw["eta_cable"], raw["eta_out"], raw.get("z0", 50.0))
    omega_mu = TWO_PI * raw["f_mu_hz"]
    omega_c = _omega_c(raw)
    flux_in = microwave_input_flux(raw["p_vna_w"], omega_mu, chain)
    gain = detection_gain(raw["p_cal_mu_w"], raw["p_cal_o_w"], chain.eta_out)
    p_out_o = raw["p_out_mu_w"] / gain.gain
    flux_out = p_out_o / (HBAR * omega_c)
    eta = oe_efficiency(raw["p_out_mu_w"], gain, omega_c, flux_in)
    return {
        "route": "oe",
        "chain": asdict(chain),
        "omega_mu_rad_s": omega_mu,
        "omega_c_rad_s": omega_c,
        "flux_in_mu_per_s": flux_in,
        "detection_gain": gain.gain,
        "p_out_o_w": p_out_o,
        "flux_out_o_per_s": flux_out,
        "eta_oe": eta,
    }


def calibrate_eo(raw: dict, scan: Trace, psd: Trace | None = None,
                 background: Trace | None = None) -> dict:
    """Optical-to-microwave efficiency.

    With ``psd`` the converted power is the band integral around ``f_mu_hz``
    (low-power route); otherwise ``s21_sq`` and ``p_eom_mu_w`` give it (VNA
    route).
    """
    chain = ChainParams(raw["eta_cable"], raw.get("eta_out", 1.0), raw.get("z0", 50.0))
    omega_mu = TWO_PI * raw["f_mu_hz"]
    omega_c = _omega_c(raw)
    corr = raw.get("pump_correction", 1.0)
    peaks = analyze_filter_scan(scan, raw.get("sideband", "largest"))
    r = peaks.ratio
    if psd is not None:
        p_meas = integrate_psd(psd, raw["f_mu_hz"], raw["f_bw_hz"], background)
        route = "eo-psd"
    else:
        p_meas = raw["p_eom_mu_w"] * raw["s21_sq"]
        route = "eo-vna"
    flux_out = microwave_output_flux(p_meas, omega_mu, chain)
    flux_in = optical_input_flux(raw["p_pump_in_w"], r, omega_c, corr)
    return {
        "route": route,
        "chain": asdict(chain),
        "omega_mu_rad_s": omega_mu,
        "omega_c_rad_s": omega_c,
        "scan": {**asdict(peaks), "ratio": r},
        "pump_correction": corr,
        "p_mu_measured_w": p_meas,
        "flux_out_mu_per_s": flux_out,
        "flux_in_o_per_s": flux_in,
        "eta_eo": flux_out / flux_in,
    }


def load_raw_set(name_or_path) -> tuple[dict, dict]:
    """Read a raw calibration set (JSON sidecar) and the traces it names.

    Relative trace paths resolve against the sidecar's directory.  Bare names
    resolve against the bundled data directory.
    """
    p = Path(name_or_path)
    if not p.suffix:
        p = Path(__file__).parent / "data" / f"{p.name}.json"
    try:
        raw = json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError(f"{p}: no such raw set") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}:{exc.lineno}: {exc.msg}") from None
    traces = {}
    for key in ("scan", "psd", "background"):
        if key in raw.get("traces", {}):
            traces[key] = read_trace_csv(p.parent / raw["traces"][key])
    return raw, traces

