"""Regenerate the bundled raw calibration sets in src/omx/data.

Each set is a JSON sidecar of instrument readings (SI units) plus CSV traces.
The readings are built backwards from a target efficiency so that running the
calibration chain forward reproduces it:

    oe       eta_oe = 1.1e-5   VNA drive, beat-note detection gain
    eo_vna   eta_eo = 1.1e-5   |S21|^2 with a 1.41 % filter scan
    eo_psd   eta_eo = 1.09e-5  integrated analyzer PSD with a 7.5 % filter scan

Run from the repository root: ``python scripts/make_calibration_data.py``.
"""

import json
from pathlib import Path

import numpy as np

from omx.extraction import synthesize_trace
from omx.traces import write_trace_csv
from omx.units import HBAR, TWO_PI, dbm_to_w, wavelength_to_angular

DATA = Path(__file__).resolve().parents[1] / "src" / "omx" / "data"

WAVELENGTH = 1550e-9
F_MU = 1.85e9
ETA_CABLE = 0.575
ETA_OUT = 0.636


def sig(x, digits=4):
    return float(f"{x:.{digits}g}")


def scan_trace(ratio, seed):
    grid = np.linspace(0.0, 10.0, 2001)
    params = {"pump_at": 5.0, "pump_amp": 1.0, "ratio": ratio, "sideband_at": [3.1, 6.9],
              "width": 0.02, "dark": 0.02, "spurs": [[5.12, 0.004]]}
    return synthesize_trace("filter_scan", params, grid,
                            {"kind": "additive-gaussian", "sigma": 5e-5}, seed)


def main():
    omega_c = wavelength_to_angular(WAVELENGTH)
    omega_mu = TWO_PI * F_MU
    e_o, e_mu = HBAR * omega_c, HBAR * omega_mu

    # microwave-to-optical
    p_vna = dbm_to_w(-40.0)
    p_cal_o, p_cal_mu = 150e-9, 1.0e-6
    gain = p_cal_mu / (p_cal_o / ETA_OUT)
    flux_in = ETA_CABLE * p_vna / e_mu
    p_out_mu = sig(1.1e-5 * flux_in * gain * e_o)
    oe = {"description": "microwave-to-optical raw set, red pump 3.3 uW",
          "wavelength_m": WAVELENGTH, "f_mu_hz": F_MU, "eta_cable": ETA_CABLE,
          "eta_out": ETA_OUT, "p_vna_w": p_vna, "p_cal_o_w": p_cal_o,
          "p_cal_mu_w": p_cal_mu, "p_out_mu_w": p_out_mu}

    # optical-to-microwave through the VNA
    r_vna, p_pump = 0.0141, 3.3e-6
    p_eom = dbm_to_w(8.0)
    flux_in_o = p_pump * r_vna / e_o
    s21_sq = sig(1.1e-5 * flux_in_o * ETA_CABLE * e_mu / p_eom)
    write_trace_csv(scan_trace(r_vna, 1), DATA / "scan_r1p41.csv")
    eo_vna = {"description": "optical-to-microwave raw set, VNA route, 8 dBm to the EOM",
              "wavelength_m": WAVELENGTH, "f_mu_hz": F_MU, "eta_cable": ETA_CABLE,
              "p_pump_in_w": p_pump, "p_eom_mu_w": p_eom, "s21_sq": s21_sq,
              "pump_correction": 1.0, "traces": {"scan": "scan_r1p41.csv"}}

    # optical-to-microwave at low pump power, band-integrated PSD
    r_psd, p_pump = 0.075, 3.0e-6
    flux_in_o = p_pump * r_psd / e_o
    p_meas = sig(1.09e-5 * flux_in_o * ETA_CABLE * e_mu)
    floor = dbm_to_w(-155.0)
    grid = np.linspace(F_MU - 25.0, F_MU + 25.0, 501)
    psd = synthesize_trace("psd", {"floor": floor, "peak_power": p_meas, "peak_at": F_MU,
                                   "peak_width": 0.1}, grid,
                           {"kind": "relative-gaussian", "sigma": 0.01}, 2)
    bg = synthesize_trace("psd", {"floor": floor}, grid,
                          {"kind": "relative-gaussian", "sigma": 0.01}, 3)
    write_trace_csv(scan_trace(r_psd, 4), DATA / "scan_r7p5.csv")
    write_trace_csv(psd, DATA / "psd_eo.csv")
    write_trace_csv(bg, DATA / "psd_background.csv")
    eo_psd = {"description": "optical-to-microwave raw set, low pump power, analyzer PSD",
              "wavelength_m": WAVELENGTH, "f_mu_hz": F_MU, "f_bw_hz": 1.0,
              "eta_cable": ETA_CABLE, "p_pump_in_w": p_pump, "pump_correction": 1.0,
              "traces": {"scan": "scan_r7p5.csv", "psd": "psd_eo.csv",
                         "background": "psd_background.csv"}}

    for name, obj in (("raw_oe", oe), ("raw_eo_vna", eo_vna), ("raw_eo_psd", eo_psd)):
        (DATA / f"{name}.json").write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
        print("wrote", DATA / f"{name}.json")


if __name__ == "__main__":
    main()
