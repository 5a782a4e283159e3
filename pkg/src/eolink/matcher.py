"""Vernier resonance pairing and DC-voltage frequency matching of two transducers.

Each device has two DC electrodes that shift its bare ring resonances
linearly (``TuningModel``). Matching a pair means solving three
conditions with four voltages:

* intra-cavity, per device: omega_m = omega_+ - omega_-
* inter-cavity: the two chosen blue comb lines coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (
    DegenerateVernierError,
    InfeasibleMatchingError,
    NoCandidatesError,
    VoltageRangeError,
)
from .model import RingPairSpec, TransducerSpec, TuningModel, hybridize

__all__ = [
    "ResonanceComb",
    "TuningModel",
    "VernierPlan",
    "find_matched_pair",
    "solve_matching",
    "tuned_frequencies",
    "vernier_period",
]

MATCH_TOLERANCE_HZ = 1e3


@dataclass(frozen=True)
class ResonanceComb:
    """Comb of resonances ``anchor_frequency + k*fsr`` for k in ``index_range`` (inclusive)."""

    anchor_frequency: float
    fsr: float
    index_range: tuple[int, int]

    def __post_init__(self) -> None:
        if not self.fsr > 0:
            raise ValueError(f"fsr must be positive, got {self.fsr}")
        lo, hi = self.index_range
        if int(lo) != lo or int(hi) != hi or lo > hi:
            raise ValueError(f"invalid index_range {self.index_range}")
        object.__setattr__(self, "index_range", (int(lo), int(hi)))

    def line(self, k):
        return self.anchor_frequency + k * self.fsr

    def indices_in(self, lo: float, hi: float) -> np.ndarray:
        k_lo = max(self.index_range[0], math.ceil((lo - self.anchor_frequency) / self.fsr) - 1)
        k_hi = min(self.index_range[1], math.floor((hi - self.anchor_frequency) / self.fsr) + 1)
        ks = np.arange(k_lo, k_hi + 1)
        f = self.line(ks)
        return ks[(f >= lo) & (f <= hi)]


@dataclass(frozen=True)
class VernierPlan:
    pair_indices: tuple[int, int]
    mismatch: float
    vernier_period: float
    solved_voltages: tuple[float, float, float, float]  # (V1, V2) Felix, then (V1, V2) Albert
    residuals: tuple[float, float, float]  # intra Felix, intra Albert, inter

    def as_dict(self) -> dict:
        v = self.solved_voltages
        r = self.residuals
        return {
            "pair_indices": {"felix": self.pair_indices[0], "albert": self.pair_indices[1]},
            "mismatch_hz": self.mismatch,
            "vernier_period_hz": self.vernier_period,
            "voltages_v": {"felix_v1": v[0], "felix_v2": v[1], "albert_v1": v[2], "albert_v2": v[3]},
            "residuals_hz": {"intra_felix": r[0], "intra_albert": r[1], "inter": r[2]},
        }


def vernier_period(fsr_a: float, delta_fsr: float) -> float:
    if delta_fsr == 0:
        raise DegenerateVernierError("equal FSRs never walk off: the Vernier period is infinite")
    return fsr_a**2 / abs(delta_fsr)


def _pair_key(fa: float, fb: float, center: float):
    mid = 0.5 * (fa + fb)
    return (abs(fa - fb), abs(mid - center), mid)


def find_matched_pair(
    comb_a: ResonanceComb, comb_b: ResonanceComb, search_window: tuple[float, float]
) -> tuple[int, int, float]:
    """Closest-frequency pair of comb lines.

    A pair qualifies when its ``comb_a`` line lies inside ``search_window``;
    the ``comb_b`` partner may be any line of its index range. Among equal
    mismatches the pair whose midpoint is nearest the window center wins,
    then the lower midpoint.

    Returns
    -------
    k_a, k_b : int
    mismatch : float
        Signed ``f_a - f_b`` [Hz].
    """
    lo, hi = search_window
    if not lo <= hi:
        raise NoCandidatesError(f"empty search window {search_window}")
    center = 0.5 * (lo + hi)
    ka_all = comb_a.indices_in(lo, hi)
    if ka_all.size == 0:
        raise NoCandidatesError("no comb_a line inside the search window")
    kb_lo, kb_hi = comb_b.index_range

    best = None
    for ka in ka_all:
        fa = comb_a.line(int(ka))
        k_floor = math.floor((fa - comb_b.anchor_frequency) / comb_b.fsr)
        # |fa - fb| is V-shaped in k_b, so the optimum is next to the unconstrained one
        for kb in {min(max(k_floor, kb_lo), kb_hi), min(max(k_floor + 1, kb_lo), kb_hi)}:
            fb = comb_b.line(kb)
            key = _pair_key(fa, fb, center)
            if best is None or key < best[0]:
                best = (key, int(ka), int(kb), fa - fb)
    _, ka, kb, mismatch = best
    return ka, kb, mismatch


def _check_voltage(tuning: TuningModel, v: float, label: str) -> None:
    if not tuning.v_min <= v <= tuning.v_max:
        raise VoltageRangeError(f"{label}={v} V outside [{tuning.v_min}, {tuning.v_max}] V")


def tuned_frequencies(
    ring_pair: RingPairSpec, tuning: TuningModel, v1: float, v2: float
) -> tuple[float, float]:
    """Supermode frequencies (omega_plus, omega_minus) at electrode voltages (v1, v2)."""
    _check_voltage(tuning, v1, "v1")
    _check_voltage(tuning, v2, "v2")
    tuned = replace(
        ring_pair,
        omega_1=ring_pair.omega_1 + tuning.alpha_1 * v1,
        omega_2=ring_pair.omega_2 + tuning.alpha_2 * v2,
    )
    omega_plus, omega_minus, _ = hybridize(tuned)
    return omega_plus, omega_minus


def _device_terms(rp: RingPairSpec, t: TuningModel, v1: float, v2: float):
    """omega_plus, splitting and their voltage gradients for one device."""
    w1 = rp.omega_1 + t.alpha_1 * v1
    w2 = rp.omega_2 + t.alpha_2 * v2
    d = w1 - w2
    s = math.hypot(rp.g_c, 0.5 * d)
    omega_plus = 0.5 * (w1 + w2) + s
    grad_plus = np.array([(0.5 + d / (4 * s)) * t.alpha_1, (0.5 - d / (4 * s)) * t.alpha_2])
    grad_split = np.array([d / (2 * s) * t.alpha_1, -d / (2 * s) * t.alpha_2])
    return omega_plus, 2 * s, grad_plus, grad_split


def _residuals_and_jacobian(felix, albert, offsets, x):
    fp, fs, fgp, fgs = _device_terms(felix.ring_pair, felix.tuning, x[0], x[1])
    ap, as_, agp, ags = _device_terms(albert.ring_pair, albert.tuning, x[2], x[3])
    r = np.array([
        felix.microwave.frequency - fs,
        albert.microwave.frequency - as_,
        (fp + offsets[0]) - (ap + offsets[1]),
    ])
    jac = np.zeros((3, 4))
    jac[0, :2] = -fgs
    jac[1, 2:] = -ags
    jac[2, :2] = fgp
    jac[2, 2:] = -agp
    return r, jac


def solve_matching(
    felix: TransducerSpec,
    albert: TransducerSpec,
    search_window: Optional[tuple[float, float]] = None,
    tolerance: float = MATCH_TOLERANCE_HZ,
    max_iterations: int = 200,
) -> VernierPlan:
    """Voltages that satisfy intra- and inter-cavity matching for the closest comb pair.

    Damped Gauss-Newton (Levenberg-Marquardt) on the three residuals from
    zero volts, using minimum-norm steps for the underdetermined system and
    projecting onto each device's voltage window. By default the pair is
    searched over one Vernier period centred on Felix's blue resonance.
    """
    if felix.tuning is None or albert.tuning is None:
        raise ValueError("both devices need a tuning model")
    blue_f = hybridize(felix.ring_pair)[0]
    blue_a = hybridize(albert.ring_pair)[0]
    fsr_f, fsr_a = felix.ring_pair.fsr, albert.ring_pair.fsr
    period = vernier_period(max(fsr_f, fsr_a), fsr_f - fsr_a)
    if search_window is None:
        search_window = (blue_f - period / 2, blue_f + period / 2)
    lo, hi = search_window
    comb_f = ResonanceComb(
        blue_f, fsr_f, (math.floor((lo - blue_f) / fsr_f) - 1, math.ceil((hi - blue_f) / fsr_f) + 1)
    )
    comb_a = ResonanceComb(
        blue_a, fsr_a, (math.floor((lo - blue_a) / fsr_a) - 2, math.ceil((hi - blue_a) / fsr_a) + 2)
    )
    k_f, k_a, mismatch = find_matched_pair(comb_f, comb_a, search_window)
    offsets = (k_f * fsr_f, k_a * fsr_a)

    lower = np.array([felix.tuning.v_min] * 2 + [albert.tuning.v_min] * 2)
    upper = np.array([felix.tuning.v_max] * 2 + [albert.tuning.v_max] * 2)
    x = np.clip(np.zeros(4), lower, upper)

    r, jac = _residuals_and_jacobian(felix, albert, offsets, x)
    # a degenerate ring pair sits at the splitting minimum where its gradient vanishes
    for dev, (i, j) in enumerate(((0, 1), (2, 3))):
        if abs(r[dev]) > tolerance and not np.any(jac[dev]):
            kick = 1e-3 * (upper[i] - lower[i])
            x[i] = min(x[i] + kick, upper[i])
            x[j] = max(x[j] - kick, lower[j])
    r, jac = _residuals_and_jacobian(felix, albert, offsets, x)
    cost = float(r @ r)
    lam = 1e-9 * max(float(np.trace(jac @ jac.T)), 1.0)
    for _ in range(max_iterations):
        if np.max(np.abs(r)) < tolerance * 1e-3:
            break
        jjt = jac @ jac.T
        step = -jac.T @ np.linalg.solve(jjt + lam * np.eye(3), r)
        x_new = np.clip(x + step, lower, upper)
        r_new, jac_new = _residuals_and_jacobian(felix, albert, offsets, x_new)
        cost_new = float(r_new @ r_new)
        if cost_new < cost:
            x, r, jac, cost = x_new, r_new, jac_new, cost_new
            lam = max(lam / 10, 1e-30)
        else:
            lam *= 10
            if lam > 1e40:
                break

    voltages = tuple(float(v) for v in x)
    residuals = tuple(float(v) for v in r)
    if np.max(np.abs(r)) >= tolerance:
        raise InfeasibleMatchingError(
            f"no voltages within the tuning windows reach {tolerance:g} Hz; "
            f"best residuals {residuals} Hz at {voltages} V",
            voltages=voltages,
            residuals=residuals,
        )
    return VernierPlan(
        pair_indices=(k_f, k_a),
        mismatch=float(mismatch),
        vernier_period=period,
        solved_voltages=voltages,
        residuals=residuals,
    )
