import json
import math

import numpy as np
import pytest

from omx.corpus import CORPUS, fit_entry
from omx.errors import DomainError, FitRejected, LasingError
from omx.extraction import (FitResult, SignConventionError, fit_aom_spectrum, fit_backaction,
                            fit_efficiency_curve, fit_optical_resonance, fit_sideband_response,
                            numeric_gradient, synthesize_trace)
from omx.traces import Trace

ENTRIES = {e.name: e for e in CORPUS}
SIDEBAND = {"delta": -3.698e9, "kappa": 1203e6, "kappa_e": 781e6}
SB_GRID = np.linspace(1.5e9, 6e9, 451)


def clean(name):
    e = ENTRIES[name]
    return e, synthesize_trace(e.model, e.params, e.grid)


@pytest.mark.parametrize("name", sorted(ENTRIES))
def test_noiseless_round_trip(name):
    e, trace = clean(name)
    fit = fit_entry(e, trace)
    for k in e.tolerance:
        assert fit.params[k] == pytest.approx(e.params[k], rel=1e-6), k
    assert all(v >= 0 for v in fit.stderr.values())


@pytest.mark.parametrize("name", ["resonance", "sideband", "aom", "backaction", "efficiency"])
def test_gradient_vanishes_at_optimum(name):
    # noisy data, so the optimum is not the generating point
    e = ENTRIES[name]
    trace = synthesize_trace(e.model, e.params, e.grid, e.noise, seed=7)
    fit = fit_entry(e, trace)
    p_fit = fit.vector()
    p_gen = np.array([e.params.get(k, p_fit[i]) for i, k in enumerate(fit.params)])
    err = np.array(list(fit.stderr.values()))
    g_fit = numeric_gradient(fit.residual_fn, p_fit, steps=1e-3 * err)
    g_gen = numeric_gradient(fit.residual_fn, p_gen, steps=1e-3 * err)
    # slope along each parameter in units of its standard error
    assert np.all(np.abs(g_fit * err) <= 1e-3 * np.abs(g_gen * err).max())


def test_numeric_gradient_matches_analytic():
    x = np.linspace(0, 1, 20)
    y = 2.0 * x + 0.5

    def resid(p):
        return p[0] * x + p[1] - y

    p = np.array([1.3, 0.1])
    r = resid(p)
    analytic = np.array([r @ x, r.sum()])
    assert np.allclose(numeric_gradient(resid, p), analytic, rtol=1e-4)


def test_stderr_scales_with_noise():
    e = ENTRIES["resonance"]
    ratios = []
    for seed in range(20):
        s1 = fit_entry(e, synthesize_trace(e.model, e.params, e.grid, {"sigma": 0.005}, seed)).stderr
        s2 = fit_entry(e, synthesize_trace(e.model, e.params, e.grid, {"sigma": 0.01}, seed)).stderr
        ratios.append([s2[k] / s1[k] for k in ("f_c", "kappa", "kappa_e")])
    assert np.mean(ratios, axis=0) == pytest.approx([2.0] * 3, rel=0.2)


# ------------------------------------------------------------ resonance

def test_resonance_quality_factors():
    e, trace = clean("resonance")
    fit = fit_optical_resonance(trace)
    assert fit.info["q_loaded"] == pytest.approx(1.6e5, rel=0.01)
    assert fit.info["q_intrinsic"] == pytest.approx(4.7e5, rel=0.01)


def test_resonance_wrong_branch_gives_mirror():
    # reflection cannot tell kappa_e from kappa - kappa_e
    e, trace = clean("resonance")
    fit = fit_optical_resonance(trace, overcoupled=False)
    assert fit.params["kappa_e"] == pytest.approx(1210e6 - 800e6, rel=1e-6)


def test_resonance_rejects_flat_trace(rng):
    x = np.linspace(-1e9, 1e9, 200)
    with pytest.raises(FitRejected):
        fit_optical_resonance(Trace(x, 1.0 + 0.01 * rng.standard_normal(200)))
    with pytest.raises(FitRejected):
        fit_optical_resonance(Trace(x[:4], np.ones(4)))


# ------------------------------------------------------------ sideband

def test_sideband_branch_discrimination():
    t = synthesize_trace("sideband_response", SIDEBAND, SB_GRID)
    both = fit_sideband_response(t)
    forced = fit_sideband_response(t, branch="under")
    assert both.info["branch"] == "over" and both.info["overcoupled"]
    assert not both.info["ambiguous"]
    assert forced.residual_norm > both.residual_norm
    assert forced.params["kappa_e"] <= forced.params["kappa"] / 2 * (1 + 1e-12)


def test_sideband_detects_undercoupled():
    p = dict(SIDEBAND, kappa_e=300e6)
    fit = fit_sideband_response(synthesize_trace("sideband_response", p, SB_GRID))
    assert fit.info["branch"] == "under"
    assert fit.params["kappa_e"] == pytest.approx(300e6, rel=1e-5)


def test_phase_and_complex_agree():
    noise = {"sigma": 0.01}
    fc = fit_sideband_response(synthesize_trace("sideband_response", SIDEBAND, SB_GRID, noise, 3))
    fp = fit_sideband_response(synthesize_trace("sideband_phase", SIDEBAND, SB_GRID, noise, 3))
    for k in SIDEBAND:
        tol = 3 * math.hypot(fc.stderr[k], fp.stderr[k])
        assert abs(fc.params[k] - fp.params[k]) <= tol, k


def test_sideband_with_mechanical_feature():
    p = dict(SIDEBAND, g_eff=2e6, f_m=3.7e9, gamma=1e6)
    x = np.linspace(3.68e9, 3.72e9, 401)
    t = synthesize_trace("sideband_response", p, x)
    fit = fit_sideband_response(t, g_eff=2e6, f_m=3.7e9, gamma=1e6, branch="over")
    assert fit.params["kappa"] == pytest.approx(1203e6, rel=1e-4)
    with pytest.raises(DomainError):
        fit_sideband_response(t, g_eff=2e6)


# ------------------------------------------------------------ AOM

@pytest.mark.parametrize("h", [1.747, 4.812])
def test_aom_reported_indices(h):
    e = ENTRIES["aom_large"]
    p = dict(e.params, h=h)
    fit = fit_aom_spectrum(synthesize_trace("aom_spectrum", p, e.grid, e.noise, 1),
                           p["kappa"], p["kappa_e"], p["f_mu"])
    assert fit.params["h"] == pytest.approx(h, rel=0.01)


def test_aom_zero_modulation():
    e = ENTRIES["aom"]
    p = dict(e.params, h=0.0)
    fit = fit_aom_spectrum(synthesize_trace("aom_spectrum", p, e.grid, e.noise, 0),
                           p["kappa"], p["kappa_e"], p["f_mu"])
    assert fit.params["h"] <= max(3 * fit.stderr["h"], 0.15)


def test_aom_axis_rescaling_leaves_h():
    e, t = clean("aom")
    p = e.params
    a = fit_aom_spectrum(t, p["kappa"], p["kappa_e"], p["f_mu"])
    scaled = Trace(t.x * 1e-9, t.y, kind=t.kind)
    b = fit_aom_spectrum(scaled, p["kappa"], p["kappa_e"], p["f_mu"], x_scale0=1e9)
    assert b.params["h"] == pytest.approx(a.params["h"], rel=1e-6)
    assert b.params["x_scale"] == pytest.approx(a.params["x_scale"] * 1e9, rel=1e-6)


# ------------------------------------------------------------ backaction

def test_backaction_monte_carlo_at_five_percent():
    e = ENTRIES["backaction"]
    ok = 0
    for seed in range(100):
        t = synthesize_trace(e.model, e.params, e.grid, {"kind": "relative-gaussian", "sigma": 0.05}, seed)
        f = fit_backaction(t.x, t.y, e.params["kappa"])
        ok += (abs(f.params["gamma"] / 1.93e6 - 1) <= 0.05 and abs(f.params["g0"] / 70e3 - 1) <= 0.03)
    assert ok >= 95


def test_backaction_errors():
    e, t = clean("backaction")
    with pytest.raises(SignConventionError):
        fit_backaction(t.x, t.y, e.params["kappa"], side="red")
    with pytest.raises(FitRejected):
        fit_backaction(t.x[:2], t.y[:2], e.params["kappa"])
    assert issubclass(SignConventionError, DomainError)


def test_backaction_red_side():
    n = np.linspace(0, 1e5, 10)
    lw = 1.93e6 + 4 * 70e3**2 * n / 1210e6
    f = fit_backaction(n, lw, 1210e6, side="red")
    assert f.params["g0"] == pytest.approx(70e3, rel=1e-9)


# ------------------------------------------------------------ efficiency

def test_efficiency_reports_g0():
    e, t = clean("efficiency")
    f = fit_efficiency_curve(t.x, t.y, kappa=1210e6, gamma=1.93e6)
    assert f.info["g0"] == pytest.approx(84e3, rel=0.02)
    assert f.info["c_max"] == pytest.approx(1.2e-5 * 4e4)


def test_efficiency_low_c_degeneracy(rng):
    n = np.geomspace(1, 100, 20)
    eta = 4.24e-4 * 4 * 1.2e-5 * n / (1 - 1.2e-5 * n) ** 2
    f = fit_efficiency_curve(n, eta * (1 + 0.01 * rng.standard_normal(20)))
    # only the product is pinned down; the factors get order-one uncertainty
    assert f.params["eta_e"] * f.params["c0"] == pytest.approx(4.24e-4 * 1.2e-5, rel=0.02)
    assert f.stderr["c0"] / f.params["c0"] > 0.5
    assert f.stderr["eta_e"] / f.params["eta_e"] > 0.5


def test_efficiency_rejections():
    n = np.geomspace(10, 4e4, 10)
    eta = 1e-3 * n
    with pytest.raises(FitRejected):
        fit_efficiency_curve(n[:3], eta[:3])
    with pytest.raises(FitRejected):
        fit_efficiency_curve(np.geomspace(10, 100, 10), eta)
    with pytest.raises(FitRejected):
        fit_efficiency_curve(n, -eta)
    # divergence at the last point forces C -> 1
    near = 4.24e-4 * 4 * (n / 4e4) / (1 - n / 4.0001e4) ** 2
    with pytest.raises(LasingError):
        fit_efficiency_curve(n, near * np.r_[np.ones(9), 1e6])


# ------------------------------------------------------------ synthesis and results

def test_synthesis_determinism_and_noise():
    e = ENTRIES["resonance"]
    a = synthesize_trace(e.model, e.params, e.grid, {"sigma": 0.01}, 5)
    b = synthesize_trace(e.model, e.params, e.grid, {"sigma": 0.01}, 5)
    assert np.array_equal(a.y, b.y)
    x = np.linspace(0, 1, 10000)
    t = synthesize_trace("efficiency", {"eta_e": 0.1, "c0": 0.0}, x + 1, {"sigma": 0.01}, 2)
    assert np.std(t.y) == pytest.approx(0.01, rel=0.1)
    with pytest.raises(ValueError):
        synthesize_trace("nope", {}, x)
    with pytest.raises(ValueError):
        synthesize_trace("efficiency", {"eta_e": 0.1, "c0": 0.0}, x, {"kind": "pink", "sigma": 0.1})


def test_fit_result_json_round_trip():
    e, t = clean("resonance")
    f = fit_entry(e, t)
    back = FitResult.from_dict(json.loads(f.to_json()))
    assert back.params == f.params and back.stderr == f.stderr
    assert back.residual_norm == f.residual_norm and back.converged == f.converged
    inf = FitResult("m", {"a": 1.0}, {"a": math.inf}, 0.0, True, 1)
    assert math.isinf(FitResult.from_dict(json.loads(inf.to_json())).stderr["a"])
