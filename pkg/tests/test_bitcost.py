import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from omx.bitcost import (FAST_LIMIT_H, EncodingProblem, e_bit_fast, e_bit_numeric, e_bit_slow,
                         encoding_fidelity, error_probability, helstrom_error, phonons_fast_limit,
                         phonons_slow_limit, required_phonons, waveform_overlap)
from omx.errors import DomainError
from omx.units import HBAR, TWO_PI

from oracles import first_crossing_bruteforce, helstrom_by_density_matrices, overlap_by_quadrature


def test_overlap_against_quadrature(rng):
    for _ in range(20):
        h = rng.uniform(0.0, 5.0)
        rk = 10 ** rng.uniform(-2, 2)
        got = waveform_overlap(h, rk)
        assert abs(got - overlap_by_quadrature(h, rk)) < 1e-6


@pytest.mark.parametrize("phases", [(0.3, 1.9), (0.0, math.pi / 2), (-1.0, 2.5)])
def test_overlap_general_phases(phases):
    got = waveform_overlap(1.3, 0.7, phases)
    assert abs(got - overlap_by_quadrature(1.3, 0.7, phases)) < 1e-6


@given(st.floats(0.0, 20.0), st.floats(1e-2, 1e2))
def test_overlap_is_bounded(h, rk):
    assert abs(waveform_overlap(h, rk)) <= 1.0 + 1e-9


def test_overlap_trivial_cases():
    assert waveform_overlap(0.0, 1.0) == 1.0
    assert waveform_overlap(2.0, 1.0, (0.4, 0.4)) == 1.0
    with pytest.raises(DomainError):
        waveform_overlap(-1.0, 1.0)
    with pytest.raises(DomainError):
        waveform_overlap(1.0, 0.0)


def test_overlap_limits():
    # slow cavity: exponential average is nearly static, K -> J_0(2h)-like average of e^{2ih sin}
    from scipy.special import j0
    assert waveform_overlap(0.9, 1e-4).real == pytest.approx(j0(1.8), abs=1e-3)
    # fast cavity: 1 - Re K ~ sum n^2 J_n(2h) / ratio_k^2 = 4 h^2 / ratio_k^2
    assert 1 - waveform_overlap(0.5, 1e3).real == pytest.approx(4 * 0.25 / 1e6, rel=1e-3)


@given(st.floats(0.0, 1.0), st.floats(0.0, 2 * math.pi))
def test_helstrom_matches_density_matrices(mag, arg):
    c = mag * complex(math.cos(arg), math.sin(arg))
    f = abs(c) ** 2
    assert helstrom_error(f) == pytest.approx(helstrom_by_density_matrices(c), abs=1e-12)


def test_helstrom_bounds():
    assert helstrom_error(1.0) == 0.5
    assert helstrom_error(0.0) == 0.0
    with pytest.raises(DomainError):
        helstrom_error(1.5)
    with pytest.raises(DomainError):
        encoding_fidelity(1.0, 1.5 + 0j)


def test_slow_limit_anchor():
    prob = EncodingProblem(1.0, 5e-5, 100.0, 0.1)
    n = phonons_slow_limit(prob)
    k = waveform_overlap(prob.ratio_g * math.sqrt(n), prob.ratio_k)
    f = encoding_fidelity(1.0, k)
    assert f == pytest.approx(1 / math.e, rel=1e-6)
    assert 100 * error_probability(n, prob) == pytest.approx(10.25, abs=0.05)
    assert helstrom_error(1 / math.e) == pytest.approx(helstrom_by_density_matrices(math.exp(-0.5)))


def test_fast_limit_constant():
    from scipy.special import j0
    assert j0(2 * FAST_LIMIT_H) == pytest.approx(0.5, abs=0.02)
    prob = EncodingProblem(ratio_g=5e-5, ratio_k=0.01)
    assert phonons_fast_limit(prob) == pytest.approx(0.76**2 / 25e-10)


@pytest.mark.parametrize("rk", [0.01, 0.3, 1.0, 3.0, 100.0])
def test_first_crossing_matches_bruteforce(rk):
    prob = EncodingProblem(ratio_g=5e-5, ratio_k=rk)
    res = required_phonons(prob)
    ref = first_crossing_bruteforce(lambda n: error_probability(n, prob), 0.1, 1.0, res.n_max, 4000)
    assert res.reached
    assert res.n_phon == pytest.approx(ref, rel=2e-3)
    assert res.pe_at_solution <= 0.1


def test_search_edge_cases():
    res = required_phonons(EncodingProblem(target_pe=0.5))
    assert res.reached and res.n_phon == 0.0
    # unreachable target: weak signal with alpha0_sq tiny
    res = required_phonons(EncodingProblem(alpha0_sq=1e-3, target_pe=0.01))
    assert not res.reached and math.isnan(res.n_phon)
    assert res.pe_min > 0.01
    with pytest.raises(DomainError):
        EncodingProblem(target_pe=0.0)
    with pytest.raises(DomainError):
        EncodingProblem(ratio_k=-1.0)


@given(st.floats(0.03, 0.45))
def test_phonons_decrease_with_looser_target(pe):
    a = required_phonons(EncodingProblem(ratio_g=1e-2, ratio_k=1.0, target_pe=pe))
    b = required_phonons(EncodingProblem(ratio_g=1e-2, ratio_k=1.0, target_pe=min(pe * 1.1, 0.5)))
    assert b.n_phon <= a.n_phon * (1 + 2e-3)


def test_e_bit_closed_forms():
    w_m, g0 = TWO_PI * 1.85e9, TWO_PI * 70e3
    assert e_bit_fast(w_m, g0, 4.4e-3) == pytest.approx(97e-15, rel=0.03)
    assert e_bit_fast(w_m, g0, 1.0) == pytest.approx(HBAR * w_m**3 / (2 * g0**2))
    assert e_bit_slow(w_m, 2 * w_m, g0, 1.0) == pytest.approx(HBAR * w_m * 4 * w_m**2 / (4 * g0**2))
    with pytest.raises(DomainError):
        e_bit_fast(w_m, g0, 0.0)
    with pytest.raises(DomainError):
        e_bit_slow(w_m, -1.0, g0, 0.5)


def test_e_bit_numeric_near_fast_limit():
    w_m, g0 = TWO_PI * 1.85e9, TWO_PI * 70e3
    prob = EncodingProblem(ratio_g=g0 / w_m, ratio_k=0.01)
    e = e_bit_numeric(prob, w_m, 4.4e-3)
    # fast closed form uses h^2 = 1/2; the search lands near h = 0.76
    assert e == pytest.approx(HBAR * w_m * phonons_fast_limit(prob) / 4.4e-3, rel=0.05)


def test_curve_between_asymptotes():
    rks = np.geomspace(1e-2, 1e2, 9)
    ns = []
    for rk in rks:
        prob = EncodingProblem(ratio_g=5e-5, ratio_k=rk)
        n = required_phonons(prob).n_phon
        slow, fast = phonons_slow_limit(prob), phonons_fast_limit(prob)
        assert 0.95 * max(slow, fast) <= n <= 1.05 * (slow + fast)
        ns.append(n)
    assert np.all(np.diff(ns) >= 0)
