"""Coherent signalling over the link: QPSK constellations and LO interference fringes."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FitError

QPSK_PHASES = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)


@dataclass(frozen=True)
class QpskRun:
    """Parameters of one constellation measurement.

    ``symbol_phases`` lists the transmitted phases (a subset of the four
    QPSK points); each is sent ``repeats_per_phase`` times.
    """

    symbol_phases: tuple = QPSK_PHASES
    repeats_per_phase: int = 50
    amplitude_in: float = 1.0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.repeats_per_phase < 1:
            raise ValueError("repeats_per_phase must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        for phi in self.symbol_phases:
            if not any(math.isclose(phi, q, abs_tol=1e-12) for q in QPSK_PHASES):
                raise ValueError(f"{phi} is not a QPSK phase")


@dataclass(frozen=True)
class QpskSample:
    symbol: int  # index into QPSK_PHASES
    i: float
    q: float


@dataclass(frozen=True)
class FringeScan:
    lo_phases: tuple
    signal_amplitude: float
    lo_amplitude: float

    def __post_init__(self) -> None:
        if self.signal_amplitude < 0 or self.lo_amplitude < 0:
            raise ValueError("amplitudes must be non-negative")


@dataclass(frozen=True)
class SineFit:
    offset: float
    amplitude: float
    phase0: float
    rms_residual: float


def sigma_from_occupancy(n_mode: float, scale: float = 1.0) -> float:
    """Per-quadrature noise standard deviation for a mode occupancy (vacuum included)."""
    return scale * math.sqrt(n_mode + 0.5)


def sigma_for_snr(signal_amplitude: float, snr_db: float) -> float:
    """Per-quadrature sigma giving SNR = |a|^2 / (2 sigma^2)."""
    return abs(signal_amplitude) / math.sqrt(2 * 10 ** (snr_db / 10))


def qpsk_constellation(link_gain: complex, run: QpskRun) -> list[QpskSample]:
    """Received (I, Q) samples, ordered symbol by symbol; deterministic given the seed."""
    rng = np.random.default_rng(run.seed)
    samples = []
    for phi in run.symbol_phases:
        label = min(range(4), key=lambda k: abs(QPSK_PHASES[k] - phi))
        ideal = link_gain * run.amplitude_in * complex(math.cos(phi), math.sin(phi))
        noise = rng.normal(0.0, run.noise_sigma, size=(run.repeats_per_phase, 2))
        for ni, nq in noise:
            samples.append(QpskSample(label, ideal.real + ni, ideal.imag + nq))
    return samples


def classify(samples: Sequence[QpskSample], link_gain: complex, amplitude_in: float = 1.0) -> np.ndarray:
    """Nearest-point decisions against the reference constellation rotated by the link gain."""
    ref = np.array([link_gain * amplitude_in * np.exp(1j * p) for p in QPSK_PHASES])
    z = np.array([s.i + 1j * s.q for s in samples])
    return np.argmin(np.abs(z[:, None] - ref[None, :]), axis=1)


def symbol_errors(samples: Sequence[QpskSample], link_gain: complex, amplitude_in: float = 1.0) -> int:
    decided = classify(samples, link_gain, amplitude_in)
    return int(np.sum(decided != np.array([s.symbol for s in samples])))


def cluster_means(samples: Sequence[QpskSample]) -> dict[int, complex]:
    out = {}
    for k in sorted({s.symbol for s in samples}):
        z = [s.i + 1j * s.q for s in samples if s.symbol == k]
        out[k] = complex(np.mean(z))
    return out


def interference_fringe(scan: FringeScan, signal_phase: float) -> list[tuple[float, float]]:
    """Detected power |A e^{i phi_s} + B e^{i phi_LO}|^2 at each LO phase."""
    a, b = scan.signal_amplitude, scan.lo_amplitude
    return [
        (float(phi), a * a + b * b + 2 * a * b * math.cos(signal_phase - phi))
        for phi in scan.lo_phases
    ]


def visibility(powers: Sequence[float]) -> float:
    pmax, pmin = max(powers), min(powers)
    return (pmax - pmin) / (pmax + pmin)


def fit_sine(samples: Sequence[tuple[float, float]]) -> SineFit:
    """Linear least-squares fit of ``offset + amplitude*cos(phi - phase0)``."""
    if len(samples) < 4:
        raise FitError("need at least 4 samples")
    phi = np.array([s[0] for s in samples], dtype=float)
    y = np.array([s[1] for s in samples], dtype=float)
    if np.ptp(phi) <= math.pi:
        raise FitError("samples must span more than pi of phase")
    basis = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    coef, _, rank, _ = np.linalg.lstsq(basis, y, rcond=None)
    if rank < 3:
        raise FitError("rank-deficient phase sampling")
    c0, cc, cs = coef
    resid = y - basis @ coef
    return SineFit(
        offset=float(c0),
        amplitude=float(math.hypot(cc, cs)),
        phase0=float(math.atan2(cs, cc)),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
    )


def write_constellation_csv(samples: Sequence[QpskSample], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["symbol", "I", "Q"])
        for s in samples:
            w.writerow([s.symbol, repr(s.i), repr(s.q)])


def write_fringe_csv(samples: Sequence[tuple[float, float]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["lo_phase_rad", "power"])
        for phi, p in samples:
            w.writerow([repr(float(phi)), repr(float(p))])
