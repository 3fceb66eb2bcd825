"""Device records and the figure-of-merit comparison table.

Records are stored as JSON with every input annotated by its provenance.
Missing inputs stay ``None``; the table marks the affected cells instead of
substituting defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .bitcost import e_bit_fast, e_bit_slow
from .errors import ConfigError, DomainError
from .model import energy_per_qubit_rates
from .units import SPEED_OF_LIGHT, TWO_PI, wavelength_to_angular

__all__ = [
    "DeviceRecord",
    "load_records",
    "records_to_json",
    "fom_table",
    "format_table",
    "TABLE_QUANTITIES",
    "TABLE_TOLERANCE",
]

TABLE_QUANTITIES = ("c0", "eta0", "eta_int", "e_bit", "e_qubit")
TABLE_TOLERANCE = 0.10

_INPUTS = ("g0_hz", "kappa_hz", "gamma_hz", "eta_o", "eta_m", "omega_m_hz", "wavelength_m", "n_c")


@dataclass(frozen=True)
class DeviceRecord:
    """One row of the comparison table.

    Rates are angular (rad/s).  ``None`` marks an input that was not reported.
    ``e_bit_g0`` and ``e_bit_eta_m`` override g0 and eta_m for the bit-energy
    column when that column was derived from a different measurement.
    """

    label: str
    platform: str = ""
    g0: float | None = None
    kappa: float | None = None
    gamma: float | None = None
    omega_m: float | None = None
    eta_o: float | None = None
    eta_m: float | None = None
    eta_oc: float | None = None
    omega_c: float | None = None
    n_c: float | None = None
    e_bit_g0: float | None = None
    e_bit_eta_m: float | None = None
    tabulated: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("g0", "kappa", "gamma", "omega_m", "omega_c", "e_bit_g0"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise DomainError(f"{self.label}: {name} must be positive, got {v}")
        for name in ("eta_o", "eta_m", "eta_oc", "e_bit_eta_m"):
            v = getattr(self, name)
            if v is not None and not 0 < v <= 1:
                raise DomainError(f"{self.label}: {name} must lie in (0, 1], got {v}")
        if self.n_c is not None and self.n_c < 0:
            raise DomainError(f"{self.label}: n_c must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceRecord":
        if "label" not in d:
            raise ConfigError("device record without a label")
        inputs = d.get("inputs", {})
        unknown = set(inputs) - set(_INPUTS) - {"eta_oc"}
        if unknown:
            raise ConfigError(f"{d['label']}: unknown inputs {sorted(unknown)}")

        def get(block, key):
            entry = block.get(key)
            if entry is None:
                return None, "missing"
            if isinstance(entry, dict):
                return entry.get("value"), entry.get("source", "")
            return entry, ""

        prov = {}
        vals = {}
        for key in (*_INPUTS, "eta_oc"):
            vals[key], prov[key] = get(inputs, key)
        eb = d.get("e_bit_inputs", {})
        eb_g0, prov["e_bit_g0_hz"] = get(eb, "g0_hz")
        eb_eta, prov["e_bit_eta_m"] = get(eb, "eta_m")

        def ang(v):
            return None if v is None else TWO_PI * v

        return cls(
            label=d["label"], platform=d.get("platform", ""),
            g0=ang(vals["g0_hz"]), kappa=ang(vals["kappa_hz"]), gamma=ang(vals["gamma_hz"]),
            omega_m=ang(vals["omega_m_hz"]), eta_o=vals["eta_o"], eta_m=vals["eta_m"],
            eta_oc=vals["eta_oc"],
            omega_c=None if vals["wavelength_m"] is None else wavelength_to_angular(vals["wavelength_m"]),
            n_c=vals["n_c"], e_bit_g0=ang(eb_g0), e_bit_eta_m=eb_eta,
            tabulated=dict(d.get("tabulated", {})), provenance=prov,
        )

    def to_dict(self) -> dict:
        def hz(v):
            return None if v is None else v / TWO_PI

        wl = None if self.omega_c is None else TWO_PI * SPEED_OF_LIGHT / self.omega_c
        values = {"g0_hz": hz(self.g0), "kappa_hz": hz(self.kappa), "gamma_hz": hz(self.gamma),
                  "eta_o": self.eta_o, "eta_m": self.eta_m, "omega_m_hz": hz(self.omega_m),
                  "wavelength_m": wl, "n_c": self.n_c}
        if self.eta_oc is not None:
            values["eta_oc"] = self.eta_oc
        out = {"label": self.label, "platform": self.platform,
               "inputs": {k: {"value": v, "source": self.provenance.get(k, "")}
                          for k, v in values.items()},
               "tabulated": self.tabulated}
        if self.e_bit_g0 is not None or self.e_bit_eta_m is not None:
            out["e_bit_inputs"] = {
                "g0_hz": {"value": hz(self.e_bit_g0), "source": self.provenance.get("e_bit_g0_hz", "")},
                "eta_m": {"value": self.e_bit_eta_m, "source": self.provenance.get("e_bit_eta_m", "")},
            }
        return out


def load_records(path=None) -> list[DeviceRecord]:
    """Read a record database; the bundled comparison table by default."""
    p = Path(path) if path is not None else Path(__file__).parent / "data" / "table1.json"
    try:
        doc = json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError(f"{p}: no such record file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}:{exc.lineno}: {exc.msg}") from None
    if "records" not in doc:
        raise ConfigError(f"{p}: missing 'records' list")
    return [DeviceRecord.from_dict(d) for d in doc["records"]]


def records_to_json(records, description: str = "") -> str:
    doc = {"description": description, "records": [r.to_dict() for r in records]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _missing(rec: DeviceRecord, names):
    return [n for n in names if getattr(rec, n) is None]


def _compute(rec: DeviceRecord):
    """Computed cells and, for uncomputable ones, the missing inputs."""
    out, why, regime = {}, {}, None

    miss = _missing(rec, ["g0", "kappa", "gamma"])
    c0 = None
    if miss:
        why["c0"] = miss
    else:
        c0 = 4.0 * rec.g0**2 / (rec.kappa * rec.gamma)
        out["c0"] = c0

    miss = _missing(rec, ["eta_o", "eta_m"]) + ([] if c0 is not None else ["c0"])
    if miss:
        why["eta0"] = miss
    else:
        out["eta0"] = 4.0 * rec.eta_o * rec.eta_m * c0

    miss = _missing(rec, ["n_c"]) + ([] if c0 is not None else ["c0"])
    if miss:
        why["eta_int"] = miss
    else:
        coop = c0 * rec.n_c
        out["eta_int"] = 4.0 * coop / (1.0 + coop) ** 2

    g0 = rec.e_bit_g0 if rec.e_bit_g0 is not None else rec.g0
    eta_m = rec.e_bit_eta_m if rec.e_bit_eta_m is not None else rec.eta_m
    miss = [n for n, v in (("g0", g0), ("eta_m", eta_m), ("omega_m", rec.omega_m),
                           ("kappa", rec.kappa)) if v is None]
    if miss:
        why["e_bit"] = miss
    elif rec.kappa > rec.omega_m:
        regime = "slow"
        out["e_bit"] = e_bit_slow(rec.omega_m, rec.kappa, g0, eta_m)
    else:
        regime = "fast"
        out["e_bit"] = e_bit_fast(rec.omega_m, g0, eta_m)

    miss = _missing(rec, ["omega_c", "kappa", "eta_o", "g0", "eta_m"])
    if miss:
        why["e_qubit"] = miss
    else:
        out["e_qubit"] = energy_per_qubit_rates(rec.omega_c, rec.kappa, rec.eta_o, rec.g0, rec.eta_m)
    return out, why, regime


def fom_table(records, tolerance: float = TABLE_TOLERANCE) -> list[dict]:
    """Long-format comparison of computed and tabulated figures of merit.

    One row per (record, quantity).  ``status`` is ``ok`` or ``mismatch``
    when both values exist, ``insufficient inputs`` when the value cannot
    be computed (``missing`` lists why), and ``not tabulated`` otherwise.
    """
    rows = []
    for rec in records:
        computed, why, regime = _compute(rec)
        for q in TABLE_QUANTITIES:
            tab = rec.tabulated.get(q)
            val = computed.get(q)
            row = {"label": rec.label, "quantity": q, "computed": val, "tabulated": tab,
                   "rel_err": None, "status": None, "missing": why.get(q, []),
                   "regime": regime if q == "e_bit" else None}
            if val is None:
                row["status"] = "insufficient inputs"
            elif tab is None:
                row["status"] = "not tabulated"
            else:
                row["rel_err"] = abs(val / tab - 1.0)
                row["status"] = "ok" if row["rel_err"] <= tolerance else "mismatch"
            rows.append(row)
    return rows


def format_table(rows) -> str:
    """Plain-text rendering of :func:`fom_table` rows."""
    lines = [f"{'label':<20} {'quantity':<8} {'computed':>11} {'tabulated':>11} {'rel_err':>8}  status"]
    for r in rows:
        c = "" if r["computed"] is None else f"{r['computed']:.3g}"
        t = "" if r["tabulated"] is None else f"{r['tabulated']:.3g}"
        e = "" if r["rel_err"] is None else f"{r['rel_err']:.1%}"
        s = r["status"]
        if r["missing"]:
            s += " (" + ", ".join(r["missing"]) + ")"
        if r["regime"]:
            s += f" [{r['regime']}]"
        lines.append(f"{r['label']:<20} {r['quantity']:<8} {c:>11} {t:>11} {e:>8}  {s}")
    return "\n".join(lines)

