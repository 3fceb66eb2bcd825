"""Parameter extraction from measured or synthetic traces.

Every fit is a bounded nonlinear least-squares problem solved with
``scipy.optimize.least_squares`` (trust-region reflective, finite-difference
Jacobian).  Parameters are shifted and scaled around the initial guess so the
solver sees O(1) unknowns; uncertainties come from the Jacobian at the optimum,
scaled by the reduced residual variance.

Frequencies in traces and fit parameters are ordinary frequencies (Hz).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .aom import reflection_spectrum
from .errors import DomainError, FitRejected, LasingError
from .model import OpticalCavity, soo_response
from .traces import Trace

__all__ = [
    "FitResult",
    "SignConventionError",
    "fit_optical_resonance",
    "fit_sideband_response",
    "fit_aom_spectrum",
    "fit_backaction",
    "fit_efficiency_curve",
    "synthesize_trace",
    "MODELS",
    "numeric_gradient",
]

MAX_ITER = 200
XTOL = 1e-10


class SignConventionError(DomainError):
    """Slope sign inconsistent with the declared pump side."""


@dataclass
class FitResult:
    model: str
    params: dict
    stderr: dict
    residual_norm: float
    converged: bool
    n_iter: int
    info: dict = field(default_factory=dict)
    residual_fn: Callable | None = field(default=None, repr=False, compare=False)
    x0: np.ndarray | None = field(default=None, repr=False, compare=False)

    def vector(self) -> np.ndarray:
        return np.array(list(self.params.values()), dtype=float)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": {k: _num_out(v) for k, v in self.params.items()},
            "stderr": {k: _num_out(v) for k, v in self.stderr.items()},
            "residual_norm": _num_out(self.residual_norm),
            "converged": self.converged,
            "n_iter": self.n_iter,
            "info": _jsonable(self.info),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        return cls(
            model=d["model"],
            params={k: _num_in(v) for k, v in d["params"].items()},
            stderr={k: _num_in(v) for k, v in d["stderr"].items()},
            residual_norm=_num_in(d["residual_norm"]),
            converged=bool(d["converged"]),
            n_iter=int(d["n_iter"]),
            info=d.get("info", {}),
        )


def _num_out(v):
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def _num_in(v):
    return float(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num_out(obj)
    return obj


def numeric_gradient(residual_fn, p, rel_step=1e-6, steps=None):
    """Gradient of 0.5*|r|^2 by central differences (used for checks).

    ``steps`` overrides the per-parameter step, which matters for parameters
    such as an optical carrier frequency whose magnitude dwarfs its scale.
    """
    p = np.asarray(p, dtype=float)
    r0 = residual_fn(p)
    jac = np.empty((r0.size, p.size))
    for i in range(p.size):
        h = steps[i] if steps is not None else rel_step * max(abs(p[i]), 1e-300)
        up, dn = p.copy(), p.copy()
        up[i] += h
        dn[i] -= h
        jac[:, i] = (residual_fn(up) - residual_fn(dn)) / (2 * h)
    return jac.T @ r0


def _solve(model, names, residual_fn, p0, lower, upper, scale, info=None) -> FitResult:
    """Bounded least squares around ``p0`` with per-parameter ``scale``."""
    p0 = np.asarray(p0, dtype=float)
    scale = np.asarray(scale, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    p0 = np.clip(p0, lower, upper)

    def fun(u):
        return residual_fn(p0 + scale * u)

    lb = (lower - p0) / scale
    ub = (upper - p0) / scale
    res = optimize.least_squares(fun, np.zeros_like(p0), bounds=(lb, ub), method="trf",
                                 jac="3-point", xtol=XTOL, ftol=1e-15, gtol=1e-15,
                                 max_nfev=MAX_ITER)
    p = p0 + scale * res.x
    r = res.fun
    n, k = r.size, p.size
    rss = float(r @ r)
    jac_p = res.jac / scale
    dof = max(n - k, 1)
    try:
        cov = np.linalg.inv(jac_p.T @ jac_p) * (rss / dof)
        err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        err = np.full(k, np.inf)
    return FitResult(
        model=model,
        params=dict(zip(names, map(float, p))),
        stderr=dict(zip(names, map(float, err))),
        residual_norm=rss,
        converged=bool(res.status > 0),
        n_iter=int(res.nfev),
        info=dict(info or {}, status=int(res.status), message=res.message),
        residual_fn=residual_fn,
        x0=p0,
    )


def _noise_floor(y):
    # robust sample-to-sample noise estimate (Gaussian MAD of first differences)
    d = np.diff(np.asarray(y, dtype=float))
    return 1.4826 * np.median(np.abs(d - np.median(d))) / math.sqrt(2.0)


def _require_points(trace: Trace, n_params: int):
    if len(trace) < n_params + 2:
        raise FitRejected(f"{len(trace)} samples cannot constrain {n_params} parameters")


# ---------------------------------------------------------------- resonance

def resonance_model(f, f_c, kappa, kappa_e):
    return np.abs(1.0 - kappa_e / (1j * (f_c - f) + kappa / 2.0)) ** 2


def fit_optical_resonance(trace: Trace, overcoupled: bool = True) -> FitResult:
    """Fit the reflection dip versus laser frequency for (f_c, kappa, kappa_e).

    The reflected power is identical for kappa_e and kappa - kappa_e, so the
    coupling branch has to be supplied (normally from a sideband-phase fit).
    """
    _require_points(trace, 3)
    x, y = trace.x, np.asarray(trace.y, dtype=float)
    baseline = np.percentile(y, 90)
    i_min = int(np.argmin(y))
    noise = _noise_floor(y)
    # judge the dip on a 5-point running mean so single noisy samples do not count
    smooth = np.convolve(y, np.ones(5) / 5.0, mode="valid") if len(y) >= 5 else y
    depth = np.median(y) - smooth.min()
    if depth <= 3.0 * noise or depth <= 0:
        raise FitRejected(f"no resonance dip: depth {depth:.3g} vs noise {noise:.3g}")
    depth = baseline - y[i_min]
    half = baseline - depth / 2.0
    below = np.nonzero(y < half)[0]
    fwhm = x[below[-1]] - x[below[0]] if below.size > 1 else 3.0 * (x[1] - x[0])
    fwhm = max(fwhm, x[1] - x[0])
    f_c0 = x[i_min]

    # kappa_e = kappa/2 (1 +/- s), s = sqrt(R_min)
    sgn = 1.0 if overcoupled else -1.0

    def unpack(p):
        f_c, kappa, s = p
        return f_c, kappa, 0.5 * kappa * (1.0 + sgn * s)

    def resid_internal(p):
        return resonance_model(x, *unpack(p)) - y

    s0 = math.sqrt(max(y[i_min] / max(baseline, 1e-12), 0.0))
    fit = _solve("optical_resonance", ["f_c", "kappa", "s"], resid_internal,
                 [f_c0, fwhm, min(s0, 0.99)],
                 [-np.inf, 1e-9 * fwhm, 0.0], [np.inf, np.inf, 1.0],
                 [fwhm, fwhm, 0.1])
    f_c, kappa, kappa_e = unpack(fit.vector())

    def resid(p):
        return resonance_model(x, *p) - y

    out = _repackage(fit, "optical_resonance", ["f_c", "kappa", "kappa_e"],
                     [f_c, kappa, kappa_e], resid, len(x), steps=[1e-7 * kappa] * 3)
    out.info.update(overcoupled=overcoupled, q_loaded=f_c / kappa,
                    q_intrinsic=f_c / (kappa - kappa_e) if kappa > kappa_e else math.inf)
    return out


def _repackage(fit: FitResult, model, names, values, resid, n, steps=None) -> FitResult:
    """Re-express a fit in physical parameters with a fresh covariance."""
    p = np.asarray(values, dtype=float)
    r = resid(p)
    rss = float(r @ r)
    jac = np.empty((r.size, p.size))
    for i in range(p.size):
        if steps is not None:
            h = steps[i]
        else:
            h = 1e-7 * abs(p[i]) if p[i] != 0 else 1e-9
        up, dn = p.copy(), p.copy()
        up[i] += h
        dn[i] -= h
        jac[:, i] = (resid(up) - resid(dn)) / (2 * h)
    dof = max(n - p.size, 1)
    try:
        cov = np.linalg.inv(jac.T @ jac) * (rss / dof)
        err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        err = np.full(p.size, np.inf)
    return FitResult(model, dict(zip(names, map(float, p))), dict(zip(names, map(float, err))),
                     rss, fit.converged, fit.n_iter, dict(fit.info), resid, None)


# ---------------------------------------------------------------- sideband

def _wrap(a):
    return np.angle(np.exp(1j * a))


def fit_sideband_response(trace: Trace, g_eff: float = 0.0, f_m: float | None = None,
                          gamma: float | None = None, side: str = "blue",
                          branch: str | None = None) -> FitResult:
    """Fit the optical sideband reflection S_oo(f) for (delta, kappa, kappa_e).

    ``trace`` holds complex S_oo (kind ``s_param``) or its phase in radians
    (kind ``phase``) against modulation frequency.  Both coupling branches are
    fitted unless ``branch`` is ``"over"`` or ``"under"``; the result reports
    which one won and whether the data can tell them apart.
    """
    _require_points(trace, 3)
    if g_eff and (f_m is None or gamma is None):
        raise DomainError("a nonzero g_eff needs f_m and gamma")
    f_m = f_m if f_m is not None else 1.0
    gamma = gamma if gamma is not None else 1.0
    x = trace.x
    phase_only = not trace.is_complex
    y = np.asarray(trace.y)

    def model(p):
        delta, kappa, kappa_e = p
        return soo_response(x, delta, kappa, kappa_e, g_eff, f_m, gamma, side)

    if phase_only:
        def resid(p):
            return _wrap(np.angle(model(p)) - y)
        feature = np.abs(np.gradient(np.unwrap(y), x))
        noise, n_res = _noise_floor(np.unwrap(y)), len(x)
    else:
        def resid(p):
            d = model(p) - y
            return np.concatenate([d.real, d.imag])
        feature = np.abs(1.0 - y)
        noise, n_res = max(_noise_floor(y.real), _noise_floor(y.imag)), 2 * len(x)

    i_pk = int(np.argmax(feature))
    delta0 = -x[i_pk] if side == "blue" else x[i_pk]
    span = x[-1] - x[0]
    above = np.nonzero(feature > feature[i_pk] / 2.0)[0]
    width0 = max(x[above[-1]] - x[above[0]], 4 * (x[1] - x[0])) if above.size > 1 else span / 10.0

    # a start that lands at the noise level ends the search for its branch
    good_enough = 4.0 * n_res * max(noise, 1e-12) ** 2

    def setup(br):
        sgn = 1.0 if br == "over" else -1.0

        def unpack(q):
            delta, kappa, s = q
            return delta, kappa, 0.5 * kappa * (1.0 + sgn * s)

        def r_int(q):
            return resid(unpack(q))

        starts = [(kscale * width0, s0) for kscale in (0.5, 1.0, 2.0, 4.0) for s0 in (0.3, 0.7)]
        cost = [float(np.sum(r_int([delta0, k0, s0]) ** 2)) for k0, s0 in starts]
        order = np.argsort(cost, kind="stable")
        return unpack, r_int, [starts[i] for i in order], cost[order[0]]

    plans = {br: setup(br) for br in ([branch] if branch else ["over", "under"])}
    fits = {}
    ref = None
    # most promising branch first; a clearly worse second branch gets three starts
    for br in sorted(plans, key=lambda b: plans[b][3]):
        unpack, r_int, starts, _ = plans[br]
        best = None
        for i, (k0, s0) in enumerate(starts):
            f = _solve("sideband_response", ["delta", "kappa", "s"], r_int,
                       [delta0, k0, s0], [-np.inf, 1e-6 * k0, 0.0], [np.inf, np.inf, 1.0],
                       [k0, k0, 0.1])
            if best is None or f.residual_norm < best.residual_norm:
                best = f
            if best.residual_norm <= good_enough:
                break
            if ref is not None and i >= 2 and best.residual_norm > 2.0 * ref:
                break
        ref = best.residual_norm if ref is None else min(ref, best.residual_norm)
        vals = unpack(best.vector())
        fits[br] = _repackage(best, "sideband_response", ["delta", "kappa", "kappa_e"],
                              vals, resid, resid(vals).size)

    win = min(fits, key=lambda b: fits[b].residual_norm)
    out = fits[win]
    n = resid(out.vector()).size
    sigma2 = out.residual_norm / max(n - 3, 1)
    info = {"branch": win, "overcoupled": out.params["kappa_e"] > out.params["kappa"] / 2.0,
            "phase_only": phase_only}
    if len(fits) == 2:
        other = fits["under" if win == "over" else "over"]
        info["rss_over"] = fits["over"].residual_norm
        info["rss_under"] = fits["under"].residual_norm
        # both branches within one sigma of each other in chi-square
        info["ambiguous"] = bool(other.residual_norm - out.residual_norm <= sigma2)
    else:
        info["ambiguous"] = False
    out.info.update(info)
    return out


# ---------------------------------------------------------------- AOM

def aom_model(x, h, x_shift, x_scale, kappa, kappa_e, f_mu):
    cav = OpticalCavity(0.0, kappa, kappa_e)
    return reflection_spectrum(cav, h, f_mu, x_scale * (x - x_shift))


AOM_STARTS = (0.5, 1.0, 2.0, 4.0, 8.0)


def fit_aom_spectrum(trace: Trace, kappa: float, kappa_e: float, f_mu: float,
                     h_starts=AOM_STARTS, x_scale0: float = 1.0) -> FitResult:
    """Fit a modulated reflection spectrum for (h, x_shift, x_scale).

    Detuning is ``x_scale * (x - x_shift)``; the cavity rates and drive
    frequency are fixed.  ``x_scale0`` is the starting guess for the axis
    scale (Hz per abscissa unit).  Large modulation indices need a good start,
    so the fit is repeated from every value in ``h_starts`` and the best kept.
    """
    _require_points(trace, 3)
    x, y = trace.x, np.asarray(trace.y, dtype=float)
    dip = np.clip(np.max(y) - y, 0.0, None)
    shift0 = float(np.sum(dip * x) / np.sum(dip)) if dip.sum() > 0 else float(np.mean(x))

    def resid(p):
        return aom_model(x, p[0], p[1], p[2], kappa, kappa_e, f_mu) - y

    # try starts in order of initial misfit; stop once the residual is at the noise level
    ranked = sorted(h_starts, key=lambda h0: float(np.sum(resid([h0, shift0, x_scale0]) ** 2)))
    good_enough = 4.0 * len(x) * max(_noise_floor(y), 1e-12) ** 2
    best = None
    for h0 in ranked:
        f = _solve("aom_spectrum", ["h", "x_shift", "x_scale"], resid,
                   [h0, shift0, x_scale0], [0.0, -np.inf, 1e-3 * x_scale0], [50.0, np.inf, np.inf],
                   [0.5, kappa / 4.0 / x_scale0, 0.05 * x_scale0])
        if best is None or f.residual_norm < best.residual_norm:
            best = f
        if best.residual_norm <= good_enough:
            break
    if best is None or not best.converged and best.residual_norm > len(x):
        raise FitRejected("AOM spectrum fit failed from every start")
    out = _repackage(best, "aom_spectrum", ["h", "x_shift", "x_scale"], best.vector(), resid, len(x))
    out.info["starts"] = list(h_starts)
    return out


# ---------------------------------------------------------------- backaction

def backaction_model(n_c, gamma, g0, kappa, side="blue"):
    sign = -1.0 if side == "blue" else 1.0
    return gamma + sign * 4.0 * g0**2 * n_c / kappa


def fit_backaction(n_c, linewidth, kappa: float, side: str = "blue") -> FitResult:
    """Fit mechanical linewidth versus pump photon number for (gamma, g0).

    Units follow the inputs: linewidths and kappa in Hz give gamma and g0 in Hz.
    """
    n_c = np.asarray(n_c, dtype=float)
    lw = np.asarray(linewidth, dtype=float)
    if n_c.size != lw.size:
        raise ValueError("n_c and linewidth lengths differ")
    if n_c.size < 3:
        raise FitRejected("backaction fit needs at least three points")
    slope, intercept = np.polyfit(n_c, lw, 1)
    if side == "blue" and slope > 0:
        raise SignConventionError("linewidth grows with n_c under a blue pump; check the detuning sign")
    if side == "red" and slope < 0:
        raise SignConventionError("linewidth shrinks with n_c under a red pump; check the detuning sign")
    g0_start = math.sqrt(abs(slope) * kappa / 4.0)

    def resid(p):
        return backaction_model(n_c, p[0], p[1], kappa, side) - lw

    g_scale = g0_start if g0_start > 0 else 1.0
    fit = _solve("backaction", ["gamma", "g0"], resid, [intercept, g0_start],
                 [-np.inf, 0.0], [np.inf, np.inf], [abs(intercept) or 1.0, g_scale])
    return _repackage(fit, "backaction", ["gamma", "g0"], fit.vector(), resid, n_c.size)


# ---------------------------------------------------------------- efficiency

def efficiency_model(n_c, eta_e, c0, side="blue"):
    c = c0 * np.asarray(n_c, dtype=float)
    if side == "blue":
        return eta_e * 4.0 * c / (1.0 - c) ** 2
    return eta_e * 4.0 * c / (1.0 + c) ** 2


def fit_efficiency_curve(n_c, eta, side: str = "blue", kappa: float | None = None,
                         gamma: float | None = None) -> FitResult:
    """Fit efficiency versus pump photon number for (eta_e, c0).

    Residuals are relative, so every decade of n_c weighs the same.  With
    ``kappa`` and ``gamma`` (same unit as the desired g0) the implied
    vacuum coupling sqrt(c0 kappa gamma)/2 is reported in ``info``.
    """
    n_c = np.asarray(n_c, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if n_c.size < 4:
        raise FitRejected("efficiency fit needs at least four points")
    if np.any(n_c <= 0) or np.any(eta <= 0):
        raise FitRejected("photon numbers and efficiencies must be positive")
    if math.log10(n_c.max() / n_c.min()) < 2.0 - 1e-9:
        raise FitRejected("n_c must span at least two decades")
    n_hi = n_c.max()

    # low-C start: eta ~ 4 eta_e c0 n, take c0 at a tenth of the lasing bound
    c0_start = 0.1 / n_hi if side == "blue" else 1.0 / n_hi
    prod = float(np.median(eta / (4.0 * n_c)))

    def resid(p):
        return efficiency_model(n_c, p[0], p[1], side) / eta - 1.0

    upper_c0 = (1.0 - 1e-9) / n_hi if side == "blue" else np.inf
    best = None
    for factor in (1.0, 3.0, 9.0):
        c_init = min(c0_start * factor, 0.95 / n_hi) if side == "blue" else c0_start * factor
        f = _solve("efficiency", ["eta_e", "c0"], resid, [prod / c_init, c_init],
                   [0.0, 0.0], [np.inf, upper_c0], [prod / c_init, c_init])
        if best is None or f.residual_norm < best.residual_norm:
            best = f
    eta_e, c0 = best.vector()
    if side == "blue" and c0 * n_hi >= 1.0 - 1e-6:
        raise LasingError(f"fitted cooperativity {c0 * n_hi:.3g} reaches the lasing bound")
    out = _repackage(best, "efficiency", ["eta_e", "c0"], [eta_e, c0], resid, n_c.size)
    out.info["c_max"] = c0 * n_hi
    if kappa is not None and gamma is not None:
        g0 = math.sqrt(c0 * kappa * gamma) / 2.0
        rel = out.stderr["c0"] / c0 / 2.0 if c0 > 0 else math.inf
        out.info["g0"] = g0
        out.info["g0_stderr"] = g0 * rel
    return out


# ---------------------------------------------------------------- synthesis

def _synth_resonance(x, p):
    return resonance_model(x, p["f_c"], p["kappa"], p["kappa_e"]), "reflection"


def _synth_sideband(x, p):
    y = soo_response(x, p["delta"], p["kappa"], p["kappa_e"], p.get("g_eff", 0.0),
                     p.get("f_m", 1.0), p.get("gamma", 1.0), p.get("side", "blue"))
    return y, "s_param"


def _synth_sideband_phase(x, p):
    y, _ = _synth_sideband(x, p)
    return np.angle(y), "phase"


def _synth_aom(x, p):
    y = aom_model(x, p["h"], p.get("x_shift", 0.0), p.get("x_scale", 1.0),
                  p["kappa"], p["kappa_e"], p["f_mu"])
    return y, "reflection"


def _synth_backaction(x, p):
    return backaction_model(x, p["gamma"], p["g0"], p["kappa"], p.get("side", "blue")), "linewidth"


def _synth_efficiency(x, p):
    return efficiency_model(x, p["eta_e"], p["c0"], p.get("side", "blue")), "efficiency"


def _synth_filter_scan(x, p):
    """Pump peak plus two sidebands (Lorentzian filter passband) over a dark level."""
    width = p["width"]

    def peak(center, amp):
        return amp / (1.0 + ((x - center) / (width / 2.0)) ** 2)

    y = p.get("dark", 0.0) + peak(p["pump_at"], p["pump_amp"])
    for pos in p["sideband_at"]:
        y = y + peak(pos, p["pump_amp"] * p["ratio"])
    for pos, amp in p.get("spurs", []):
        y = y + peak(pos, amp)
    return y, "scan"


def _synth_psd(x, p):
    y = np.full_like(x, p["floor"], dtype=float)
    if p.get("peak_power", 0.0):
        w = p.get("peak_width", x[1] - x[0])
        shape = np.exp(-0.5 * ((x - p["peak_at"]) / w) ** 2)
        y = y + p["peak_power"] * shape / (w * math.sqrt(2.0 * math.pi))
    return y, "psd"


MODELS = {
    "optical_resonance": _synth_resonance,
    "sideband_response": _synth_sideband,
    "sideband_phase": _synth_sideband_phase,
    "aom_spectrum": _synth_aom,
    "backaction": _synth_backaction,
    "efficiency": _synth_efficiency,
    "filter_scan": _synth_filter_scan,
    "psd": _synth_psd,
}


def synthesize_trace(model: str, params: dict, grid, noise: dict | None = None,
                     seed: int = 0) -> Trace:
    """Evaluate a forward model on ``grid`` and add optional Gaussian noise.

    ``noise`` is ``{"kind": "additive-gaussian" | "relative-gaussian", "sigma": s}``.
    Additive noise has standard deviation ``sigma`` in ordinate units; relative
    noise multiplies each sample by (1 + sigma * N(0, 1)).  Complex ordinates
    get independent noise on both quadratures.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    x = np.asarray(grid, dtype=float)
    y, kind = MODELS[model](x, params)
    y = np.array(y)
    sigma = float((noise or {}).get("sigma", 0.0))
    if sigma > 0:
        rng = np.random.default_rng(seed)
        nkind = noise.get("kind", "additive-gaussian")
        draw = rng.standard_normal(y.shape)
        if np.iscomplexobj(y):
            draw = draw + 1j * rng.standard_normal(y.shape)
        if nkind == "additive-gaussian":
            y = y + sigma * draw
        elif nkind == "relative-gaussian":
            y = y * (1.0 + sigma * draw)
        else:
            raise ValueError(f"unknown noise kind {nkind!r}")
    meta = {"model": model, "seed": int(seed), "sigma": sigma,
            "params": {k: v for k, v in params.items() if not isinstance(v, (list, tuple))}}
    x_unit = "photons" if model in ("backaction", "efficiency") else "Hz"
    return Trace(x, y, kind=kind, x_unit=x_unit, meta=meta)
