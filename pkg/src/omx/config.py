"""Run configuration: JSON with explicit unit strings, validated up front.

A config is one JSON object.  Each command reads its own block plus, where
needed, a ``device`` block::

    {
      "seed": 0,
      "device": {"wavelength": "1550 nm", "kappa": "1210 MHz", "kappa_e": "800 MHz",
                 "f_m": "1.85 GHz", "gamma": "1.93 MHz", "gamma_mu": "8.6 kHz",
                 "g0": "70 kHz"},
      "model": {"side": "red", "n_c": {"start": 1, "stop": 1e5, "num": 41, "scale": "log"}}
    }

Dimensional fields must carry a unit.  Frequencies are ordinary Hz here and
become angular only when device objects are built.  Unknown keys are errors.
Every error names the field and, when it can be found, the line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import DeviceParams, MechanicalMode, OpticalCavity
from .units import TWO_PI, UnitError, parse_quantity, wavelength_to_angular

__all__ = ["RunConfig", "load_config", "parse_config", "COMMANDS", "build_device"]

COMMANDS = ("model", "aom", "bitcost", "fit", "calibrate", "table", "synth")

FIT_KINDS = ("optical_resonance", "sideband_response", "aom_spectrum", "backaction", "efficiency")
SYNTH_MODELS = ("optical_resonance", "sideband_response", "sideband_phase", "aom_spectrum",
                "backaction", "efficiency", "filter_scan", "psd")


class _F:
    """Field spec: kind, argument (dimension or choices), required, default."""

    def __init__(self, kind, arg=None, required=False, default=None):
        self.kind, self.arg, self.required, self.default = kind, arg, required, default


DEVICE = {
    "wavelength": _F("q", "length"),
    "f_c": _F("q", "frequency"),
    "kappa": _F("q", "frequency", True),
    "kappa_e": _F("q", "frequency", True),
    "f_m": _F("q", "frequency", True),
    "gamma": _F("q", "frequency", True),
    "gamma_mu": _F("q", "frequency"),
    "eta_m": _F("num"),
    "g0": _F("q", "frequency", True),
    "eta_oc": _F("num", default=1.0),
    "z0": _F("q", "impedance", default=50.0),
}

BLOCKS = {
    "model": {
        "side": _F("choice", ("red", "blue"), True),
        "n_c": _F("grid", "dimensionless"),
        "freq": _F("grid", "frequency"),
        "delta": _F("q", "frequency"),
        "pump_n_c": _F("num"),
        "p_in": _F("q", "power"),
    },
    "aom": {
        "f_mu": _F("q", "frequency", True),
        "p_mu": _F("qlist", "power", True),
        "detuning": _F("grid", "frequency", True),
        "bandwidth": _F("q", "frequency"),
    },
    "bitcost": {
        "ratio_g": _F("num", required=True),
        "ratio_k": _F("grid", "dimensionless", True),
        "alpha0_sq": _F("num", default=1.0),
        "target_pe": _F("num", default=0.1),
        "f_m": _F("q", "frequency"),
        "eta_m": _F("num"),
        "points_per_decade": _F("int", default=40),
    },
    "fit": {
        "kind": _F("choice", FIT_KINDS, True),
        "trace": _F("path", required=True),
        "overcoupled": _F("bool", default=True),
        "side": _F("choice", ("red", "blue"), default="blue"),
        "branch": _F("choice", ("over", "under")),
        "g_eff": _F("q", "frequency", default=0.0),
        "f_m": _F("q", "frequency"),
        "gamma": _F("q", "frequency"),
        "kappa": _F("q", "frequency"),
        "kappa_e": _F("q", "frequency"),
        "f_mu": _F("q", "frequency"),
    },
    "calibrate": {
        "route": _F("choice", ("oe", "eo"), True),
        "raw": _F("str", required=True),
    },
    "table": {
        "records": _F("path"),
        "tolerance": _F("num", default=0.10),
    },
    "synth": {
        "model": _F("choice", SYNTH_MODELS, True),
        "params": _F("params", required=True),
        "grid": _F("grid", None, True),
        "noise": _F("noise"),
        "name": _F("str", default="trace"),
    },
}

NEEDS_DEVICE = {"model", "aom"}


@dataclass(frozen=True)
class RunConfig:
    command: str
    block: dict
    device: dict | None
    seed: int
    base_dir: Path

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


class _Ctx:
    def __init__(self, source, text):
        self.source, self.text = source, text

    def fail(self, where: str, msg: str):
        line = _line_of(self.text, where.rsplit(".", 1)[-1])
        loc = f"{self.source}:{line}" if line else str(self.source)
        raise ConfigError(f"{loc}: {where}: {msg}")


def _grid(v, dim, where, ctx):
    if isinstance(v, list):
        if not v:
            ctx.fail(where, "empty grid")
        arr = np.array([parse_quantity(x, dim) for x in v], dtype=float)
    elif isinstance(v, dict):
        extra = set(v) - {"start", "stop", "num", "scale"}
        if extra:
            ctx.fail(where, f"unknown grid keys {sorted(extra)}")
        for k in ("start", "stop", "num"):
            if k not in v:
                ctx.fail(where, f"grid needs '{k}'")
        num = v["num"]
        if not isinstance(num, int) or isinstance(num, bool) or num < 1:
            ctx.fail(where, f"grid 'num' must be a positive integer, got {num!r}")
        a, b = parse_quantity(v["start"], dim), parse_quantity(v["stop"], dim)
        scale = v.get("scale", "linear")
        if scale == "linear":
            arr = np.linspace(a, b, num)
        elif scale == "log":
            if not (a > 0 and b > 0):
                ctx.fail(where, "log grid needs positive endpoints")
            arr = np.geomspace(a, b, num)
        else:
            ctx.fail(where, f"grid scale must be 'linear' or 'log', got {scale!r}")
    else:
        ctx.fail(where, "grid must be a list or {start, stop, num[, scale]}")
    if arr.size > 1 and np.any(np.diff(arr) <= 0):
        ctx.fail(where, "grid must be strictly increasing")
    return arr


def _field(spec: _F, v, where, ctx):
    try:
        if spec.kind == "q":
            return parse_quantity(v, spec.arg)
        if spec.kind == "num":
            return parse_quantity(v, "dimensionless")
        if spec.kind == "qlist":
            items = v if isinstance(v, list) else [v]
            if not items:
                ctx.fail(where, "empty list")
            return [parse_quantity(x, spec.arg) for x in items]
        if spec.kind == "grid":
            return _grid(v, spec.arg, where, ctx)
    except UnitError as exc:
        ctx.fail(where, str(exc))
    if spec.kind == "int":
        if not isinstance(v, int) or isinstance(v, bool):
            ctx.fail(where, f"expected an integer, got {v!r}")
        return v
    if spec.kind == "bool":
        if not isinstance(v, bool):
            ctx.fail(where, f"expected true or false, got {v!r}")
        return v
    if spec.kind == "choice":
        if v not in spec.arg:
            ctx.fail(where, f"expected one of {list(spec.arg)}, got {v!r}")
        return v
    if spec.kind in ("str", "path"):
        if not isinstance(v, str) or not v:
            ctx.fail(where, f"expected a non-empty string, got {v!r}")
        return v
    if spec.kind == "params":
        if not isinstance(v, dict):
            ctx.fail(where, "expected an object")
        out = {}
        for k, x in v.items():
            if isinstance(x, list):
                out[k] = [_param_value(e, f"{where}.{k}", ctx) for e in x]
            else:
                out[k] = _param_value(x, f"{where}.{k}", ctx)
        return out
    if spec.kind == "noise":
        if not isinstance(v, dict) or set(v) - {"kind", "sigma"}:
            ctx.fail(where, "noise must be {kind, sigma}")
        kind = v.get("kind", "additive-gaussian")
        if kind not in ("additive-gaussian", "relative-gaussian"):
            ctx.fail(where, f"unknown noise kind {kind!r}")
        try:
            sigma = parse_quantity(v.get("sigma", 0.0))
        except UnitError as exc:
            ctx.fail(where, str(exc))
        if sigma < 0:
            ctx.fail(where, "sigma must be non-negative")
        return {"kind": kind, "sigma": sigma}
    raise AssertionError(spec.kind)


def _param_value(x, where, ctx):
    if isinstance(x, list):
        return [_param_value(e, where, ctx) for e in x]
    if isinstance(x, str) and x in ("red", "blue"):
        return x
    try:
        return parse_quantity(x)
    except UnitError as exc:
        ctx.fail(where, str(exc))


def _block(schema, raw, name, ctx):
    if not isinstance(raw, dict):
        ctx.fail(name, "expected an object")
    unknown = set(raw) - set(schema)
    if unknown:
        ctx.fail(f"{name}.{sorted(unknown)[0]}", f"unknown key; allowed: {sorted(schema)}")
    out = {}
    for key, spec in schema.items():
        where = f"{name}.{key}"
        if key in raw and raw[key] is not None:
            out[key] = _field(spec, raw[key], where, ctx)
        elif spec.required:
            ctx.fail(where, "required field missing")
        else:
            out[key] = spec.default
    return out


def parse_config(doc: dict, command: str, source="<config>", text: str | None = None,
                 base_dir=".") -> RunConfig:
    ctx = _Ctx(source, text)
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    allowed = set(COMMANDS) | {"device", "seed", "description"}
    unknown = set(doc) - allowed
    if unknown:
        ctx.fail(sorted(unknown)[0], f"unknown top-level key; allowed: {sorted(allowed)}")
    if command not in doc:
        ctx.fail(command, f"config has no '{command}' block")
    block = _block(BLOCKS[command], doc[command], command, ctx)
    device = None
    if command in NEEDS_DEVICE:
        if "device" not in doc:
            ctx.fail("device", f"'{command}' needs a device block")
        device = _block(DEVICE, doc["device"], "device", ctx)
        if device["gamma_mu"] is None and device["eta_m"] is None:
            ctx.fail("device.gamma_mu", "give gamma_mu or eta_m")
        if command == "model" and device["wavelength"] is None and device["f_c"] is None:
            ctx.fail("device.wavelength", "give wavelength or f_c")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        ctx.fail("seed", f"seed must be an unsigned 64-bit integer, got {seed!r}")
    if command == "model" and block["n_c"] is None and block["freq"] is None:
        ctx.fail("model", "nothing to sweep: give n_c and/or freq")
    if command == "fit":
        need = {"aom_spectrum": ("kappa", "kappa_e", "f_mu"), "backaction": ("kappa",)}
        for key in need.get(block["kind"], ()):
            if block[key] is None:
                ctx.fail(f"fit.{key}", f"required for kind {block['kind']!r}")
    return RunConfig(command, block, device, seed, Path(base_dir))


def load_config(path, command: str) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    return parse_config(doc, command, str(path), text, path.parent)


def build_device(dev: dict) -> DeviceParams:
    """DeviceParams (angular rates) from a validated device block (Hz)."""
    if dev["wavelength"] is not None:
        omega_c = wavelength_to_angular(dev["wavelength"])
    elif dev["f_c"] is not None:
        omega_c = TWO_PI * dev["f_c"]
    else:
        omega_c = 0.0
    gamma = TWO_PI * dev["gamma"]
    gamma_mu = TWO_PI * dev["gamma_mu"] if dev["gamma_mu"] is not None else dev["eta_m"] * gamma
    cav = OpticalCavity(omega_c, TWO_PI * dev["kappa"], TWO_PI * dev["kappa_e"])
    mech = MechanicalMode(TWO_PI * dev["f_m"], gamma, gamma_mu)
    return DeviceParams(cav, mech, TWO_PI * dev["g0"], dev["eta_oc"], dev["z0"])
