import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eolink.errors import InfeasibleInputError, UninvertibleError
from eolink.model import MicrowaveModeParams
from eolink.noise import (
    BathOccupancies,
    infer_baths,
    mode_occupancy,
    output_noise_spectrum,
    reflection_on_resonance,
    reflection_spectrum,
)
from eolink.spectra import FrequencyGrid

ALBERT_MW = MicrowaveModeParams(4.606e9, 2.4e6, 11.5e6)


def grid_for(mw, span_factor=20, points=401):
    return FrequencyGrid(mw.frequency, span_factor * mw.kappa_total, points)


def test_albert_reflection_on_resonance():
    oracle = ((2.4 - 11.5) / 13.9) ** 2
    assert reflection_on_resonance(ALBERT_MW) == pytest.approx(oracle, rel=1e-9)
    assert oracle == pytest.approx(0.4286, abs=5e-5)


def test_albert_mode_occupancy():
    oracle = (2.4 * 0.1 + 11.5 * 0.5) / 13.9
    n = mode_occupancy(ALBERT_MW, BathOccupancies(n_ex=0.5, n_en=0.1))
    assert n == pytest.approx(oracle, rel=1e-9)
    assert oracle == pytest.approx(0.4309, abs=5e-5)


def test_critical_coupling_and_far_detuning():
    mw = MicrowaveModeParams(5e9, 3e6, 3e6)
    assert reflection_on_resonance(mw) == 0.0
    far = FrequencyGrid(mw.frequency + 1e3 * mw.kappa_total, 1.0, 3)
    assert np.all(np.abs(reflection_spectrum(mw, far) - 1) < 1e-5)


def test_equal_baths_give_flat_spectrum():
    sp = output_noise_spectrum(ALBERT_MW, BathOccupancies(0.3, 0.3, 0.05), grid_for(ALBERT_MW))
    np.testing.assert_allclose(sp.s_dev, 0.35, rtol=1e-14)
    assert sp.n_mode == pytest.approx(0.3, rel=1e-14)


def test_overcoupled_limit_without_intrinsic_loss():
    # no intrinsic loss: |R| = 1 everywhere, only the external bath is seen
    mw = MicrowaveModeParams(5e9, 0.0, 3e6)
    sp = output_noise_spectrum(mw, BathOccupancies(0.7, 0.2, 0.1), grid_for(mw))
    np.testing.assert_allclose(sp.s_dev, 0.8, rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    kin=st.floats(0, 1e8), kex=st.floats(1e3, 1e8),
    n_ex=st.floats(0, 10), n_en=st.floats(0, 10), extra=st.floats(0, 5),
)
def test_noise_model_properties(kin, kex, n_ex, n_en, extra):
    mw = MicrowaveModeParams(5e9, kin, kex)
    baths = BathOccupancies(n_ex, n_en, extra)
    sp = output_noise_spectrum(mw, baths, grid_for(mw, points=201))
    # convex weights
    assert kex / mw.kappa_total + kin / mw.kappa_total == pytest.approx(1.0, abs=1e-15)
    lo, hi = min(n_ex, n_en), max(n_ex, n_en)
    slack = 1e-12 * (1 + hi + extra)
    assert lo - slack <= sp.n_mode <= hi + slack
    assert np.all(sp.s_dev >= lo + extra - slack)
    assert np.all(sp.s_dev <= hi + extra + slack)


@settings(max_examples=200, deadline=None)
@given(
    kin=st.floats(1e4, 1e8), kex=st.floats(1e4, 1e8),
    n_ex=st.floats(1e-3, 10), n_en=st.floats(1e-3, 10), extra=st.floats(0, 5),
)
def test_infer_round_trip(kin, kex, n_ex, n_en, extra):
    mw = MicrowaveModeParams(5e9, kin, kex)
    r0 = reflection_on_resonance(mw)
    if r0 > 0.999:
        return  # near-singular; the inversion amplifies rounding by 1/(1 - R0)
    baths = BathOccupancies(n_ex, n_en, extra)
    on = float(output_noise_spectrum(mw, baths, FrequencyGrid(mw.frequency, 1.0, 3)).s_dev[1])
    off = n_ex + extra  # the R -> 1 limit
    got = infer_baths(on, off, mw, extra)
    assert got.n_ex == pytest.approx(n_ex, rel=1e-12, abs=1e-12 * (1 + extra))
    assert got.n_en == pytest.approx(n_en, rel=1e-12 * 10 / (1 - r0), abs=1e-12 * (1 + extra + n_ex) / (1 - r0))
    assert got.delta_n_out_add == baths.delta_n_out_add


def test_infer_from_generated_spectrum():
    baths = BathOccupancies(0.5, 0.1, 0.02)
    grid = FrequencyGrid(ALBERT_MW.frequency, 2e3 * ALBERT_MW.kappa_total, 2001)
    sp = output_noise_spectrum(ALBERT_MW, baths, grid)
    # off-resonance reading comes from an R = 1 reference, as in the model
    got = infer_baths(float(sp.s_dev[1000]), baths.n_ex + baths.delta_n_out_add, ALBERT_MW, 0.02)
    assert got.n_ex == pytest.approx(0.5, rel=1e-12)
    assert got.n_en == pytest.approx(0.1, rel=1e-12)


def test_equal_readings_give_equal_baths():
    got = infer_baths(0.4, 0.4, ALBERT_MW, 0.0)
    assert got.n_ex == pytest.approx(got.n_en, rel=1e-14)


def test_excess_added_noise_is_infeasible():
    with pytest.raises(InfeasibleInputError):
        infer_baths(0.4, 0.4, ALBERT_MW, 0.5)


def test_negative_intrinsic_bath_is_infeasible():
    with pytest.raises(InfeasibleInputError):
        infer_baths(0.0, 1.0, ALBERT_MW, 0.0)


def test_unit_reflection_is_uninvertible():
    with pytest.raises(UninvertibleError):
        infer_baths(0.4, 0.5, MicrowaveModeParams(5e9, 0.0, 1e6), 0.0)


def test_baths_must_be_non_negative():
    with pytest.raises(ValueError):
        BathOccupancies(-0.1, 0.1)
