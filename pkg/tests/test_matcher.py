import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eolink.devices import FITTED_ALPHA_HZ_PER_V
from eolink.errors import (
    DegenerateVernierError,
    InfeasibleMatchingError,
    NoCandidatesError,
    VoltageRangeError,
)
from eolink.matcher import (
    ResonanceComb,
    find_matched_pair,
    solve_matching,
    tuned_frequencies,
    vernier_period,
)
from eolink.model import RingPairSpec, TuningModel, hybridize


def brute_force(comb_a, comb_b, window):
    lo, hi = window
    center = 0.5 * (lo + hi)
    best = None
    for ka in range(comb_a.index_range[0], comb_a.index_range[1] + 1):
        fa = comb_a.line(ka)
        if not lo <= fa <= hi:
            continue
        for kb in range(comb_b.index_range[0], comb_b.index_range[1] + 1):
            fb = comb_b.line(kb)
            mid = 0.5 * (fa + fb)
            key = (abs(fa - fb), abs(mid - center), mid)
            if best is None or key < best[0]:
                best = (key, ka, kb, fa - fb)
    return best[1:]


def substitute(felix, albert, plan):
    v = plan.solved_voltages
    fp, fm = tuned_frequencies(felix.ring_pair, felix.tuning, v[0], v[1])
    ap, am = tuned_frequencies(albert.ring_pair, albert.tuning, v[2], v[3])
    kf, ka = plan.pair_indices
    return (
        felix.microwave.frequency - (fp - fm),
        albert.microwave.frequency - (ap - am),
        (fp + kf * felix.ring_pair.fsr) - (ap + ka * albert.ring_pair.fsr),
    )


# --- Vernier period ----------------------------------------------------------


def test_vernier_period_examples():
    assert vernier_period(353e9, 11e9) == pytest.approx(11.33e12, rel=1e-2)
    assert vernier_period(353e9, 353e9) == 353e9
    assert vernier_period(100e9, 7e9) == pytest.approx(1428.57e9, abs=0.01e9)
    assert vernier_period(100e9, -7e9) == vernier_period(100e9, 7e9)


def test_vernier_period_degenerate():
    with pytest.raises(DegenerateVernierError):
        vernier_period(353e9, 0.0)


# --- pair search -------------------------------------------------------------


def test_identical_combs_pair_at_zero():
    comb = ResonanceComb(190e12, 350e9, (-5, 5))
    assert find_matched_pair(comb, comb, (189e12, 191e12)) == (0, 0, 0.0)


def test_reference_combs_respect_half_delta_bound():
    a = ResonanceComb(190.6438e12, 353e9, (-40, 40))
    b = ResonanceComb(190.6400e12, 342e9, (-45, 45))
    period = vernier_period(353e9, 11e9)
    _, _, mismatch = find_matched_pair(a, b, (a.anchor_frequency - period / 2, a.anchor_frequency + period / 2))
    assert abs(mismatch) <= 5.5e9


def test_empty_window():
    comb = ResonanceComb(190e12, 350e9, (-2, 2))
    with pytest.raises(NoCandidatesError):
        find_matched_pair(comb, comb, (200e12, 201e12))
    with pytest.raises(NoCandidatesError):
        find_matched_pair(comb, comb, (191e12, 190e12))


def test_comb_validation():
    with pytest.raises(ValueError):
        ResonanceComb(190e12, 0.0, (0, 1))
    with pytest.raises(ValueError):
        ResonanceComb(190e12, 1e9, (2, 1))


@settings(max_examples=300, deadline=None)
@given(
    anchor_b=st.floats(-500e9, 500e9),
    fsr_a=st.floats(50e9, 500e9),
    fsr_b=st.floats(50e9, 500e9),
    span=st.floats(0.0, 20e12),
    ra=st.integers(5, 60),
    rb=st.integers(5, 60),
    integer_grid=st.booleans(),
)
def test_pair_search_equals_brute_force(anchor_b, fsr_a, fsr_b, span, ra, rb, integer_grid):
    if integer_grid:
        # integer GHz values force exact ties to exercise the tie-break
        anchor_b, fsr_a, fsr_b = (round(x / 1e9) * 1e9 for x in (anchor_b, fsr_a, fsr_b))
    a = ResonanceComb(190e12, fsr_a, (-ra, ra))
    b = ResonanceComb(190e12 + anchor_b, fsr_b, (-rb, rb))
    window = (190e12 - span / 2, 190e12 + span / 2)
    try:
        got = find_matched_pair(a, b, window)
    except NoCandidatesError:
        assert not a.indices_in(*window).size
        return
    assert got == brute_force(a, b, window)


def test_half_delta_bound_over_random_combs():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        fsr_small = rng.uniform(50e9, 500e9)
        delta = rng.uniform(0.005, 0.2) * fsr_small
        fsr_large = fsr_small + delta  # comb_a carries the larger FSR
        period = vernier_period(fsr_large, delta)
        anchor_a = rng.uniform(180e12, 200e12)
        anchor_b = anchor_a + rng.uniform(-fsr_small, fsr_small)
        window = (anchor_a - period / 2, anchor_a + period / 2)
        na = math.ceil(period / fsr_large) + 2
        nb = math.ceil(period / fsr_small) + 4
        a = ResonanceComb(anchor_a, fsr_large, (-na, na))
        b = ResonanceComb(anchor_b, fsr_small, (-nb, nb))
        _, _, mismatch = find_matched_pair(a, b, window)
        worst = max(worst, abs(mismatch) / (delta / 2))
    assert worst <= 1 + 1e-9


# --- tuning ------------------------------------------------------------------


RP = RingPairSpec(190.637e12, 190.637e12, 5e9, 60e-6, 353e9)
TUNE = TuningModel(11.875e6, 11.875e6, -160.0, 160.0)


def test_zero_volts_is_hybridize():
    assert tuned_frequencies(RP, TUNE, 0.0, 0.0) == hybridize(RP)[:2]


@settings(max_examples=100, deadline=None)
@given(v=st.floats(-160, 160))
def test_common_mode_shift(v):
    wp0, wm0 = hybridize(RP)[:2]
    wp, wm = tuned_frequencies(RP, TUNE, v, v)
    assert wp - wp0 == pytest.approx(TUNE.alpha_1 * v, abs=0.1)
    assert wm - wm0 == pytest.approx(TUNE.alpha_1 * v, abs=0.1)
    assert wp - wm == pytest.approx(2 * RP.g_c, abs=0.1)


@settings(max_examples=100, deadline=None)
@given(v=st.floats(-160, 160))
def test_differential_moves_never_shrink_splitting(v):
    wp, wm = tuned_frequencies(RP, TUNE, v, -v)
    assert wp - wm >= 2 * RP.g_c - 0.1


def test_voltage_out_of_window():
    with pytest.raises(VoltageRangeError):
        tuned_frequencies(RP, TUNE, 160.5, 0.0)
    with pytest.raises(VoltageRangeError):
        tuned_frequencies(RP, TUNE, 0.0, -161.0)


def test_tuning_model_validation():
    with pytest.raises(ValueError):
        TuningModel(1e6, 1e6, 10.0, -10.0)


# --- solver ------------------------------------------------------------------


def test_fitted_alpha():
    assert FITTED_ALPHA_HZ_PER_V * 2 * 160 == pytest.approx(3.8e9)
    assert FITTED_ALPHA_HZ_PER_V == pytest.approx(11.9e6, rel=5e-3)


def test_reference_scenario_closes_gap(felix, albert):
    plan = solve_matching(felix, albert)
    assert plan.pair_indices == (0, 0)
    assert plan.mismatch == pytest.approx(3.8e9, abs=1.0)
    assert all(abs(v) <= 160.0 for v in plan.solved_voltages)
    assert all(abs(r) < 1e3 for r in plan.residuals)
    assert all(abs(r) < 1e3 for r in substitute(felix, albert, plan))
    # Felix is tuned down and Albert up, as far as the window allows
    assert plan.solved_voltages == pytest.approx((-160.0, -160.0, 160.0, 160.0), abs=1e-6)


def test_already_matched_devices(felix):
    # same supermodes, different FSR so the Vernier period is finite
    twin = replace(felix, name="twin", ring_pair=replace(felix.ring_pair, fsr=353e9))
    plan = solve_matching(felix, twin)
    assert plan.solved_voltages == (0.0, 0.0, 0.0, 0.0)
    assert plan.residuals == (0.0, 0.0, 0.0)


def _random_pair(rng, felix, albert):
    """Devices built backward from random in-window voltages, so a solution exists."""
    devs = []
    target_blue = 190.642e12 + rng.uniform(-1e9, 1e9)
    for base in (felix, albert):
        alpha = rng.uniform(8e6, 15e6, size=2)
        tuning = TuningModel(alpha[0], alpha[1], -160.0, 160.0)
        v = rng.uniform(-100, 100, size=2)
        g_c = rng.uniform(1e9, 3e9)
        d = rng.uniform(-3e9, 3e9)
        omega_m = 2 * math.hypot(g_c, d / 2)
        mean = target_blue - omega_m / 2
        w1, w2 = mean + d / 2, mean - d / 2
        rp = replace(base.ring_pair, omega_1=w1 - alpha[0] * v[0], omega_2=w2 - alpha[1] * v[1], g_c=g_c)
        mw = replace(base.microwave, frequency=omega_m)
        red = replace(base.red_mode, frequency=target_blue - omega_m)
        devs.append(replace(base, ring_pair=rp, microwave=mw, red_mode=red, tuning=tuning))
    return devs


def test_random_feasible_targets(felix, albert):
    rng = np.random.default_rng(11)
    for _ in range(50):
        f, a = _random_pair(rng, felix, albert)
        plan = solve_matching(f, a)
        assert all(abs(r) < 1e3 for r in substitute(f, a, plan))
        assert all(-160 <= v <= 160 for v in plan.solved_voltages)


def test_unreachable_splitting_is_infeasible(felix, albert):
    # the splitting can never drop below 2 g_c, so omega_m < 2 g_c cannot be matched
    rp = replace(felix.ring_pair, g_c=felix.microwave.frequency / 2 + 50e6)
    bad = replace(felix, ring_pair=rp)
    with pytest.raises(InfeasibleMatchingError) as info:
        solve_matching(bad, albert)
    assert len(info.value.voltages) == 4
    assert abs(info.value.residuals[0]) >= 1e3


def test_gap_beyond_tuning_range_is_infeasible(felix, albert):
    narrow = TuningModel(FITTED_ALPHA_HZ_PER_V, FITTED_ALPHA_HZ_PER_V, -80.0, 80.0)
    with pytest.raises(InfeasibleMatchingError) as info:
        solve_matching(replace(felix, tuning=narrow), replace(albert, tuning=narrow))
    assert abs(info.value.residuals[2]) == pytest.approx(1.9e9, rel=1e-3)


def test_tuning_model_required(felix, albert):
    with pytest.raises(ValueError):
        solve_matching(replace(felix, tuning=None), albert)


def test_plan_dict(felix, albert):
    d = solve_matching(felix, albert).as_dict()
    assert set(d) == {"pair_indices", "mismatch_hz", "vernier_period_hz", "voltages_v", "residuals_hz"}
