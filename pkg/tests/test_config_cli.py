import json
import math
from pathlib import Path

import numpy as np
import pytest

from omx import cli
from omx.config import load_config, parse_config
from omx.corpus import CORPUS, build_corpus
from omx.errors import ConfigError
from omx.extraction import efficiency_model
from omx.traces import read_trace_csv
from omx.units import UnitError

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

DEVICE = {"wavelength": "1550 nm", "kappa": "1210 MHz", "kappa_e": "800 MHz", "f_m": "1.85 GHz",
          "gamma": "1.93 MHz", "gamma_mu": "8.6 kHz", "g0": "70 kHz"}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc, indent=2))
    return p


# ------------------------------------------------------------ config parsing

def test_bundled_configs_parse():
    for path, cmd in [("model_red.json", "model"), ("model_blue.json", "model"), ("aom.json", "aom"),
                      ("bitcost.json", "bitcost"), ("calibrate_oe.json", "calibrate"),
                      ("table.json", "table"), ("synth_resonance.json", "synth")]:
        cfg = load_config(CONFIGS / path, cmd)
        assert cfg.command == cmd


def test_units_are_parsed_into_hz():
    cfg = parse_config({"device": DEVICE, "model": {"side": "red", "n_c": [1, 10]}}, "model")
    assert cfg.device["kappa"] == pytest.approx(1.21e9)
    assert cfg.device["wavelength"] == pytest.approx(1.55e-6)
    assert cfg.device["eta_oc"] == 1.0


def test_diagnostics_name_line_and_field(tmp_path):
    doc = {"device": dict(DEVICE, kappa="1210 furlongs"), "model": {"side": "red", "n_c": [1]}}
    p = write(tmp_path, doc)
    with pytest.raises(ConfigError) as exc:
        load_config(p, "model")
    msg = str(exc.value)
    line = next(i for i, t in enumerate(p.read_text().splitlines(), 1) if '"kappa"' in t)
    assert f"cfg.json:{line}: device.kappa" in msg


@pytest.mark.parametrize("doc,needle", [
    ({"device": DEVICE, "model": {"side": "red", "n_c": []}}, "empty grid"),
    ({"device": DEVICE, "model": {"side": "red", "n_c": {"start": 1, "stop": 2, "num": 0}}}, "num"),
    ({"device": DEVICE, "model": {"side": "green", "n_c": [1]}}, "model.side"),
    ({"device": DEVICE, "model": {"side": "red"}}, "nothing to sweep"),
    ({"device": DEVICE, "model": {"side": "red", "n_c": [1], "colour": 1}}, "model.colour"),
    ({"device": DEVICE, "model": {"side": "red", "n_c": [1]}, "extra": {}}, "extra"),
    ({"model": {"side": "red", "n_c": [1]}}, "needs a device block"),
    ({"device": {k: v for k, v in DEVICE.items() if k != "g0"}, "model": {"side": "red", "n_c": [1]}},
     "device.g0"),
    ({"device": DEVICE, "model": {"side": "red", "n_c": [1]}, "seed": -1}, "seed"),
    ({"device": DEVICE, "model": {"side": "red", "n_c": [3, 2]}}, "strictly increasing"),
    ({"device": dict(DEVICE, kappa="1210 uW"), "model": {"side": "red", "n_c": [1]}}, "device.kappa"),
])
def test_config_errors(doc, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(doc, "model")


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "model": {\n    "side": red\n  }\n}')
    with pytest.raises(ConfigError, match="bad.json:3"):
        load_config(p, "model")


# ------------------------------------------------------------ CLI

def test_exit_codes(tmp_path, capsys):
    good = CONFIGS / "table.json"
    assert cli.main(["table", "--config", str(good), "--out", str(tmp_path / "a")]) == 0
    bad = write(tmp_path, {"table": {"tolerance": "ten"}})
    assert cli.main(["table", "--config", str(bad), "--out", str(tmp_path / "b")]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate", "--config", str(good)])
    assert exc.value.code == 2
    capsys.readouterr()


def test_fit_rejected_exit_code(tmp_path):
    x = np.linspace(-1e9, 1e9, 50)
    (tmp_path / "flat.csv").write_text("x,y_re\n" + "".join(f"{v},1.0\n" for v in x))
    cfg = write(tmp_path, {"fit": {"kind": "optical_resonance", "trace": "flat.csv"}})
    assert cli.main(["fit", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_domain_error_exit_code(tmp_path):
    # blue sweep past the lasing threshold
    doc = {"device": DEVICE, "model": {"side": "blue", "n_c": {"start": 10, "stop": 1e6, "num": 5}}}
    cfg = write(tmp_path, doc)
    assert cli.main(["model", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 4


def test_unit_error_is_config_error():
    assert issubclass(UnitError, ValueError)
    with pytest.raises(ConfigError):
        parse_config({"device": dict(DEVICE, g0=[1]), "model": {"side": "red", "n_c": [1]}}, "model")


@pytest.mark.parametrize("cmd,cfg", [
    ("model", "model_red.json"), ("model", "model_blue.json"), ("aom", "aom.json"),
    ("bitcost", "bitcost.json"), ("calibrate", "calibrate_oe.json"),
    ("calibrate", "calibrate_eo.json"), ("calibrate", "calibrate_eo_vna.json"),
    ("table", "table.json"), ("synth", "synth_resonance.json"),
])
def test_commands_are_deterministic(tmp_path, cmd, cfg, capsys):
    a = cli.run(cmd, CONFIGS / cfg, tmp_path / "a")
    b = cli.run(cmd, CONFIGS / cfg, tmp_path / "b")
    assert a == b and "summary.txt" in a
    for name in a:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        if name.endswith(".json"):
            # re-ingest without loss
            text = (tmp_path / "a" / name).read_text()
            assert json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n" == text
    capsys.readouterr()


def test_seed_changes_synthetic_output(tmp_path, capsys):
    cli.run("synth", CONFIGS / "synth_resonance.json", tmp_path / "a", seed=1)
    cli.run("synth", CONFIGS / "synth_resonance.json", tmp_path / "b", seed=2)
    a = read_trace_csv(tmp_path / "a" / "resonance.csv")
    b = read_trace_csv(tmp_path / "b" / "resonance.csv")
    assert not np.array_equal(a.y, b.y)
    with pytest.raises(ConfigError):
        cli.run("synth", CONFIGS / "synth_resonance.json", tmp_path / "c", seed=2**64)
    capsys.readouterr()


def test_efficiency_sweep_matches_fit_curve(tmp_path, capsys):
    # device chosen so eta_e = 4.24e-4 and C0 = 1.2e-5
    g0 = math.sqrt(1.2e-5 * 1210e6 * 1.93e6) / 2
    dev = dict(DEVICE, g0=f"{g0} Hz", eta_oc=1.0, kappa_e="1210 MHz")
    dev.pop("gamma_mu")
    dev["eta_m"] = 4.24e-4
    doc = {"device": dev, "model": {"side": "blue", "n_c": {"start": 10, "stop": 4e4, "num": 30,
                                                          "scale": "log"}}}
    cli.run("model", write(tmp_path, doc), tmp_path / "o")
    data = np.loadtxt(tmp_path / "o" / "efficiency.csv", delimiter=",", skiprows=1)
    assert np.allclose(data[:, 2], efficiency_model(data[:, 0], 4.24e-4, 1.2e-5), rtol=1e-9)
    capsys.readouterr()


def test_bitcost_curve_output(tmp_path, capsys):
    cli.run("bitcost", CONFIGS / "bitcost.json", tmp_path)
    lines = (tmp_path / "curve.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "ratio_k" and "n_phon" in header
    n = np.array([float(r.split(",")[header.index("n_phon")]) for r in lines[1:]])
    assert np.all(np.diff(n) >= 0)
    capsys.readouterr()


def test_corpus_passes_fit_commands(tmp_path, capsys):
    paths = build_corpus(tmp_path, seed=0)
    assert len(paths) == len(CORPUS)
    for entry, cfg in zip(CORPUS, paths):
        out = tmp_path / f"out_{entry.name}"
        assert cli.main(["fit", "--config", str(cfg), "--out", str(out)]) == 0
        fit = json.loads((out / "fit.json").read_text())
        for k, tol in entry.tolerance.items():
            assert fit["params"][k] == pytest.approx(entry.params[k], rel=tol), (entry.name, k)
    capsys.readouterr()


def test_shipped_corpus_is_current(tmp_path):
    build_corpus(tmp_path, seed=0)
    for f in sorted(tmp_path.iterdir()):
        assert f.read_bytes() == (CONFIGS / "corpus" / f.name).read_bytes(), f.name
