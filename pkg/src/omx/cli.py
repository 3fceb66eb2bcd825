"""Command-line entry point.

    omx model|aom|bitcost|fit|calibrate|table|synth --config <path> [--out <dir>] [--seed <u64>]

Each command writes machine-readable results (CSV with a header row, JSON
with sorted keys) plus ``summary.txt`` into the output directory.  Exit
codes: 0 success, 2 configuration error, 3 fit rejected, 4 domain error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import aom, bitcost, calibration, extraction, records
from .config import COMMANDS, RunConfig, build_device, load_config
from .errors import ConfigError, DomainError, FitRejected
from .model import PumpState, s_eo, s_oe, s_oo, soo_response, total_efficiency
from .traces import atomic_write_text, read_trace_csv, write_trace_csv
from .units import HBAR, TWO_PI, UnitError

__all__ = ["main", "run"]

EXIT_OK, EXIT_CONFIG, EXIT_FIT, EXIT_DOMAIN = 0, 2, 3, 4


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if v is None:
        return ""
    return f"{float(v):.17g}"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(extraction._jsonable(obj), indent=2, sort_keys=True) + "\n"


class _Out:
    """Collects output files and writes each atomically."""

    def __init__(self, root: Path):
        self.root = root
        self.written: list[str] = []

    def text(self, name, content):
        atomic_write_text(self.root / name, content)
        self.written.append(name)

    def summary(self, lines):
        text = "\n".join(lines) + "\n"
        self.text("summary.txt", text)
        sys.stdout.write(text)


def _device_summary(dev):
    return {
        "c0": dev.c0,
        "eta_o": dev.cavity.eta_o,
        "eta_m": dev.mech.eta_m,
        "eta_e": dev.eta_e,
        "sideband_resolved": dev.sideband_resolved,
        "omega_m_over_kappa": dev.mech.omega_m / dev.cavity.kappa,
    }


# ---------------------------------------------------------------- commands

def cmd_model(cfg: RunConfig, out: _Out):
    dev = build_device(cfg.device)
    b = cfg.block
    side = b["side"]
    delta = TWO_PI * b["delta"] if b["delta"] is not None else (
        dev.mech.omega_m if side == "red" else -dev.mech.omega_m)
    result = {"device": _device_summary(dev), "side": side, "delta_hz": delta / TWO_PI}
    lines = [f"model ({side} pump)", f"  C0 = {dev.c0:.4g}   eta_e = {dev.eta_e:.4g}"]

    if b["n_c"] is not None:
        n_c = b["n_c"]
        coop = dev.c0 * n_c
        if side == "blue" and coop.max() >= 1:
            raise DomainError(f"sweep reaches C = {coop.max():.3g} >= 1 under a blue pump "
                              f"(lasing above n_c = {1 / dev.c0:.4g})")
        eta = np.array([total_efficiency(dev, c, side) for c in coop])
        out.text("efficiency.csv", _csv(["n_c", "cooperativity", "eta_total"], zip(n_c, coop, eta)))
        k = int(np.argmax(eta))
        result["efficiency_sweep"] = {"points": len(n_c), "eta_max": eta[k], "n_c_at_max": n_c[k]}
        lines.append(f"  efficiency sweep: {len(n_c)} points, max eta = {eta[k]:.4g} at n_c = {n_c[k]:.4g}")

    if b["freq"] is not None:
        if b["pump_n_c"] is not None:
            pump = PumpState.from_photons(dev, delta, b["pump_n_c"])
        elif b["p_in"] is not None:
            if dev.cavity.omega_c <= 0:
                raise ConfigError("p_in needs the optical frequency (device.wavelength or f_c)")
            pump = PumpState.from_power(dev, delta, b["p_in"])
        else:
            raise ConfigError("model.freq needs model.pump_n_c or model.p_in")
        w = TWO_PI * b["freq"]
        soo, soe, seo = s_oo(dev, pump, w, side), s_oe(dev, pump, w, side), s_eo(dev, pump, w, side)
        rows = zip(b["freq"], soo.real, soo.imag, soe.real, soe.imag, seo.real, seo.imag, np.abs(soe) ** 2)
        out.text("s_params.csv", _csv(["f_hz", "s_oo_re", "s_oo_im", "s_oe_re", "s_oe_im",
                                       "s_eo_re", "s_eo_im", "abs_s_oe_sq"], rows))
        result["pump"] = {"n_c": pump.n_c, "cooperativity": pump.coop,
                          "g_eff_hz": pump.g_eff / TWO_PI, "p_in_w": pump.p_in}
        lines.append(f"  S-parameters: {len(w)} frequencies, n_c = {pump.n_c:.4g}, C = {pump.coop:.4g}")
        lines.append(f"  peak |S_oe|^2 = {np.max(np.abs(soe) ** 2):.4g}")
    out.text("result.json", _json(result))
    out.summary(lines)


def cmd_aom(cfg: RunConfig, out: _Out):
    dev = build_device(cfg.device)
    b = cfg.block
    omega_mu = TWO_PI * b["f_mu"]
    det = b["detuning"]
    drives, rows = [], []
    lines = [f"aom at f_mu = {b['f_mu']:.6g} Hz"]
    for p in b["p_mu"]:
        d = aom.DriveState.from_power(dev, omega_mu, p)
        entry = {"p_mu_w": p, "n_phon": d.n_phon, "h": d.h}
        if d.h > 0 and p > 0:
            v = aom.v_pi(d.h, p, dev.z0)
            entry.update(v_pi_v=v, p_pi_w=aom.p_pi(v, dev.z0))
            if b["bandwidth"] is not None:
                entry["e_bit_vpi_j"] = aom.energy_per_bit_vpi(v, b["bandwidth"], dev.z0)
        drives.append(entry)
        refl = aom.reflection_spectrum(dev.cavity, d.h, omega_mu, TWO_PI * det)
        rows.extend(zip([p] * len(det), det, refl))
        lines.append(f"  P = {p:.4g} W: n_phon = {d.n_phon:.4g}, h = {d.h:.4g}"
                     + (f", V_pi = {entry['v_pi_v'] * 1e3:.4g} mV" if "v_pi_v" in entry else ""))
    out.text("reflection.csv", _csv(["p_mu_w", "detuning_hz", "reflection"], rows))
    out.text("result.json", _json({"device": _device_summary(dev), "f_mu_hz": b["f_mu"],
                                   "drives": drives}))
    out.summary(lines)


def cmd_bitcost(cfg: RunConfig, out: _Out):
    b = cfg.block
    rows, lines = [], ["bit cost: required phonons versus kappa/omega_m"]
    energy = b["f_m"] is not None and b["eta_m"] is not None
    for rk in b["ratio_k"]:
        prob = bitcost.EncodingProblem(b["alpha0_sq"], b["ratio_g"], float(rk), b["target_pe"])
        res = bitcost.required_phonons(prob, points_per_decade=b["points_per_decade"])
        e = HBAR * TWO_PI * b["f_m"] * res.n_phon / b["eta_m"] if energy and res.reached else None
        rows.append([rk, res.n_phon, bitcost.phonons_slow_limit(prob),
                     bitcost.phonons_fast_limit(prob), res.reached, res.pe_at_solution, e])
    header = ["ratio_k", "n_phon", "n_slow_limit", "n_fast_limit", "reached", "pe", "e_bit_j"]
    out.text("curve.csv", _csv(header, rows))
    out.text("result.json", _json({"ratio_g": b["ratio_g"], "alpha0_sq": b["alpha0_sq"],
                                   "target_pe": b["target_pe"],
                                   "curve": [dict(zip(header, r)) for r in rows]}))
    for r in rows[:: max(1, len(rows) // 8)]:
        lines.append(f"  kappa/omega_m = {r[0]:.3g}: n_phon = {r[1]:.4g}")
    out.summary(lines)


def _fit_curve(kind, b, fit, trace):
    p, x = fit.params, trace.x
    if kind == "optical_resonance":
        return extraction.resonance_model(x, p["f_c"], p["kappa"], p["kappa_e"])
    if kind == "sideband_response":
        y = soo_response(x, p["delta"], p["kappa"], p["kappa_e"], b["g_eff"],
                         b["f_m"] or 1.0, b["gamma"] or 1.0, b["side"])
        return y if trace.is_complex else np.angle(y)
    if kind == "aom_spectrum":
        return extraction.aom_model(x, p["h"], p["x_shift"], p["x_scale"],
                                    b["kappa"], b["kappa_e"], b["f_mu"])
    if kind == "backaction":
        return extraction.backaction_model(x, p["gamma"], p["g0"], b["kappa"], b["side"])
    return extraction.efficiency_model(x, p["eta_e"], p["c0"], b["side"])


def cmd_fit(cfg: RunConfig, out: _Out):
    b = cfg.block
    trace = read_trace_csv(cfg.resolve(b["trace"]))
    kind = b["kind"]
    if kind == "optical_resonance":
        fit = extraction.fit_optical_resonance(trace, b["overcoupled"])
    elif kind == "sideband_response":
        fit = extraction.fit_sideband_response(trace, b["g_eff"], b["f_m"], b["gamma"],
                                               b["side"], b["branch"])
    elif kind == "aom_spectrum":
        fit = extraction.fit_aom_spectrum(trace, b["kappa"], b["kappa_e"], b["f_mu"])
    elif kind == "backaction":
        fit = extraction.fit_backaction(trace.x, trace.y, b["kappa"], b["side"])
    else:
        fit = extraction.fit_efficiency_curve(trace.x, trace.y, b["side"], b["kappa"], b["gamma"])
    out.text("fit.json", fit.to_json() + "\n")
    model = _fit_curve(kind, b, fit, trace)
    if np.iscomplexobj(model):
        rows = zip(trace.x, trace.y.real, trace.y.imag, model.real, model.imag)
        out.text("fit_curve.csv", _csv(["x", "y_re", "y_im", "model_re", "model_im"], rows))
    else:
        out.text("fit_curve.csv", _csv(["x", "y", "model"], zip(trace.x, trace.y, model)))
    lines = [f"fit {kind}: converged = {fit.converged}, rss = {fit.residual_norm:.4g}"]
    for k, v in fit.params.items():
        lines.append(f"  {k} = {v:.6g} +/- {fit.stderr[k]:.2g}")
    for k in ("branch", "ambiguous", "q_loaded", "q_intrinsic", "c_max", "g0"):
        if k in fit.info:
            lines.append(f"  {k}: {fit.info[k]}")
    out.summary(lines)


def cmd_calibrate(cfg: RunConfig, out: _Out):
    b = cfg.block
    ref = b["raw"]
    source = cfg.resolve(ref) if ref.endswith(".json") else ref
    raw, traces = calibration.load_raw_set(source)
    if b["route"] == "oe":
        report = calibration.calibrate_oe(raw)
        lines = [f"microwave-to-optical: eta_oe = {report['eta_oe']:.4g}",
                 f"  input microwave flux {report['flux_in_mu_per_s']:.4g} /s",
                 f"  detection gain {report['detection_gain']:.4g}",
                 f"  output optical flux {report['flux_out_o_per_s']:.4g} /s"]
    else:
        if "scan" not in traces:
            raise ConfigError(f"{ref}: the eo route needs a filter scan trace")
        report = calibration.calibrate_eo(raw, traces["scan"], traces.get("psd"), traces.get("background"))
        lines = [f"optical-to-microwave ({report['route']}): eta_eo = {report['eta_eo']:.4g}",
                 f"  sideband ratio r = {report['scan']['ratio']:.4%}",
                 f"  input optical sideband flux {report['flux_in_o_per_s']:.4g} /s",
                 f"  output microwave flux {report['flux_out_mu_per_s']:.4g} /s"]
    report["raw"] = raw
    out.text("calibration.json", _json(report))
    out.summary(lines)


def cmd_table(cfg: RunConfig, out: _Out):
    b = cfg.block
    recs = records.load_records(cfg.resolve(b["records"]) if b["records"] else None)
    rows = records.fom_table(recs, b["tolerance"])
    header = ["label", "quantity", "computed", "tabulated", "rel_err", "status", "missing", "regime"]
    out.text("table.csv", _csv(header, ([r["label"], r["quantity"], r["computed"], r["tabulated"],
                                         r["rel_err"], r["status"], ";".join(r["missing"]),
                                         r["regime"] or ""] for r in rows)))
    out.text("table.json", _json({"tolerance": b["tolerance"], "rows": rows}))
    out.text("records.json", records.records_to_json(recs, "device records used for table.csv"))
    n_bad = sum(r["status"] == "mismatch" for r in rows)
    n_flag = sum(r["status"] == "insufficient inputs" for r in rows)
    out.summary([records.format_table(rows), "",
                 f"{n_bad} mismatches beyond {b['tolerance']:.0%}, {n_flag} cells with insufficient inputs"])


def cmd_synth(cfg: RunConfig, out: _Out):
    b = cfg.block
    trace = extraction.synthesize_trace(b["model"], b["params"], b["grid"], b["noise"], cfg.seed)
    name = f"{b['name']}.csv"
    path = out.root / name
    write_trace_csv(trace, path)
    out.written.append(name)
    out.summary([f"synth {b['model']}: {len(trace)} points, seed {cfg.seed} -> {name}"])


HANDLERS = {"model": cmd_model, "aom": cmd_aom, "bitcost": cmd_bitcost, "fit": cmd_fit,
            "calibrate": cmd_calibrate, "table": cmd_table, "synth": cmd_synth}


def run(command: str, config_path, out_dir, seed: int | None = None) -> list[str]:
    """Run one command; returns the names of the files written."""
    cfg = load_config(config_path, command)
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
        cfg = RunConfig(cfg.command, cfg.block, cfg.device, seed, cfg.base_dir)
    out = _Out(Path(out_dir))
    HANDLERS[command](cfg, out)
    return out.written


def _parser():
    p = argparse.ArgumentParser(prog="omx", description="Piezo-optomechanical transducer toolkit")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed, overrides the config")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        run(args.command, args.config, args.out, args.seed)
    except (ConfigError, UnitError) as exc:
        print(f"omx: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FitRejected as exc:
        print(f"omx: fit rejected: {exc}", file=sys.stderr)
        return EXIT_FIT
    except DomainError as exc:
        print(f"omx: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
