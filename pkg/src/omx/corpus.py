"""Synthetic example corpus: traces at the reported operating point plus
the fit configs that should recover them.

``build_corpus(directory)`` writes one CSV trace and one ``fit_<name>.json``
per entry.  ``CORPUS`` lists the generating parameters and the relative
tolerance each fitted parameter must meet.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .extraction import (fit_aom_spectrum, fit_backaction, fit_efficiency_curve,
                         fit_optical_resonance, fit_sideband_response, synthesize_trace)
from .traces import write_trace_csv

__all__ = ["CorpusEntry", "CORPUS", "build_corpus", "fit_entry"]

F_C = 193.4e12
KAPPA, KAPPA_E = 1210e6, 800e6
F_M, GAMMA, G0 = 1.85e9, 1.93e6, 70e3


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    model: str
    params: dict
    grid: np.ndarray
    noise: dict
    fit: dict
    tolerance: dict = field(default_factory=dict)


CORPUS = (
    CorpusEntry(
        "resonance", "optical_resonance",
        {"f_c": F_C, "kappa": KAPPA, "kappa_e": KAPPA_E},
        np.linspace(F_C - 4e9, F_C + 4e9, 401),
        {"kind": "additive-gaussian", "sigma": 0.01},
        {"kind": "optical_resonance", "overcoupled": True},
        {"kappa": 0.03, "kappa_e": 0.03},
    ),
    CorpusEntry(
        "sideband", "sideband_response",
        {"delta": -3.698e9, "kappa": 1203e6, "kappa_e": 781e6},
        np.linspace(1.5e9, 6e9, 451),
        {"kind": "additive-gaussian", "sigma": 0.01},
        {"kind": "sideband_response"},
        {"delta": 0.01, "kappa": 0.02, "kappa_e": 0.02},
    ),
    CorpusEntry(
        "sideband_phase", "sideband_phase",
        {"delta": -3.698e9, "kappa": 1203e6, "kappa_e": 781e6},
        np.linspace(1.5e9, 6e9, 451),
        {"kind": "additive-gaussian", "sigma": 0.01},
        {"kind": "sideband_response"},
        {"delta": 0.01, "kappa": 0.02, "kappa_e": 0.02},
    ),
    CorpusEntry(
        "aom", "aom_spectrum",
        {"h": 1.747, "kappa": KAPPA, "kappa_e": KAPPA_E, "f_mu": F_M},
        np.linspace(-12e9, 12e9, 601),
        {"kind": "additive-gaussian", "sigma": 0.01},
        {"kind": "aom_spectrum", "kappa": "1210 MHz", "kappa_e": "800 MHz", "f_mu": "1.85 GHz"},
        {"h": 0.01},
    ),
    CorpusEntry(
        "aom_large", "aom_spectrum",
        {"h": 4.812, "kappa": KAPPA, "kappa_e": KAPPA_E, "f_mu": F_M},
        np.linspace(-16e9, 16e9, 801),
        {"kind": "additive-gaussian", "sigma": 0.01},
        {"kind": "aom_spectrum", "kappa": "1210 MHz", "kappa_e": "800 MHz", "f_mu": "1.85 GHz"},
        {"h": 0.01},
    ),
    CorpusEntry(
        "backaction", "backaction",
        {"gamma": GAMMA, "g0": G0, "kappa": KAPPA},
        np.linspace(0.0, 1e5, 20),
        {"kind": "relative-gaussian", "sigma": 0.02},
        {"kind": "backaction", "kappa": "1210 MHz", "side": "blue"},
        {"gamma": 0.05, "g0": 0.05},
    ),
    CorpusEntry(
        "efficiency", "efficiency",
        {"eta_e": 4.24e-4, "c0": 1.2e-5},
        np.geomspace(10.0, 4e4, 30),
        {"kind": "relative-gaussian", "sigma": 0.01},
        {"kind": "efficiency", "side": "blue"},
        {"eta_e": 0.02, "c0": 0.02},
    ),
)


def fit_entry(entry: CorpusEntry, trace):
    """Run the fit that matches ``entry`` on ``trace``."""
    p = entry.params
    if entry.model == "optical_resonance":
        return fit_optical_resonance(trace, entry.fit.get("overcoupled", True))
    if entry.model in ("sideband_response", "sideband_phase"):
        return fit_sideband_response(trace)
    if entry.model == "aom_spectrum":
        return fit_aom_spectrum(trace, p["kappa"], p["kappa_e"], p["f_mu"])
    if entry.model == "backaction":
        return fit_backaction(trace.x, trace.y, p["kappa"], entry.fit.get("side", "blue"))
    return fit_efficiency_curve(trace.x, trace.y, entry.fit.get("side", "blue"))


def build_corpus(directory, seed: int = 0) -> list[Path]:
    """Write every corpus trace and its fit config; returns the config paths."""
    directory = Path(directory)
    paths = []
    for i, e in enumerate(CORPUS):
        trace = synthesize_trace(e.model, e.params, e.grid, e.noise, seed + i)
        write_trace_csv(trace, directory / f"{e.name}.csv")
        cfg = {"description": f"fit the synthetic {e.name} trace",
               "fit": {**e.fit, "trace": f"{e.name}.csv"}}
        path = directory / f"fit_{e.name}.json"
        path.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
        paths.append(path)
    return paths
