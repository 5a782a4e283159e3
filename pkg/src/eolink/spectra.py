"""Four-port scattering spectra of a pumped transducer and their analysis.

The pumped transducer is a beam splitter between the microwave mode and
the blue optical supermode with coupling G_eo. For a probe detuned by
delta from the microwave resonance,

    D(delta) = (kappa_m/2 - i delta)(kappa_+/2 - i delta_o) + G_eo^2
    s_oe = s_eo = sqrt(kappa_m,ex kappa_+,ex) G_eo / D
    s_ee = 1 - kappa_m,ex (kappa_+/2 - i delta_o) / D
    s_oo = 1 - kappa_+,ex (kappa_m/2 - i delta) / D

where delta_o = delta + offset is the detuning of the converted light from
the blue supermode. All quantities are in Hz; only ratios enter.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BandwidthUnresolvedError, CalibrationWindowError
from .model import PumpSpec, TransducerSpec, coupling_state, saturated_microwave

BACKGROUND_EDGE_FRACTION = 0.05
_THREE_DB = 10 ** (3.0 / 10.0)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform, odd-length grid symmetric about ``center`` (all in Hz)."""

    center: float
    span: float
    points: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.center):
            raise ValueError("center must be finite")
        if not (math.isfinite(self.span) and self.span > 0):
            raise ValueError(f"span must be positive, got {self.span}")
        if int(self.points) != self.points or self.points < 3 or self.points % 2 == 0:
            raise ValueError(f"points must be an odd integer >= 3, got {self.points}")

    @property
    def step(self) -> float:
        return self.span / (self.points - 1)

    @property
    def offsets(self) -> np.ndarray:
        # integer-based so the middle sample is exactly zero
        half = (self.points - 1) // 2
        return self.step * np.arange(-half, half + 1, dtype=float)

    @property
    def frequencies(self) -> np.ndarray:
        return self.center + self.offsets

    def detuning(self, reference: float) -> np.ndarray:
        return (self.center - reference) + self.offsets


@dataclass(frozen=True, eq=False)
class ScatterSpectra:
    """Complex S-parameters on ``grid``; ``reference`` is the microwave resonance."""

    grid: FrequencyGrid
    reference: float
    s_ee: np.ndarray
    s_oo: np.ndarray
    s_oe: np.ndarray
    s_eo: np.ndarray

    @property
    def detuning(self) -> np.ndarray:
        return self.grid.detuning(self.reference)

    def scaled(self, e_in=1.0, e_out=1.0, o_in=1.0, o_out=1.0) -> "ScatterSpectra":
        """Apply input/output chain gains (complex amplitudes) to every channel."""
        return ScatterSpectra(
            self.grid, self.reference,
            s_ee=self.s_ee * e_in * e_out,
            s_oo=self.s_oo * o_in * o_out,
            s_oe=self.s_oe * e_in * o_out,
            s_eo=self.s_eo * o_in * e_out,
        )


def model_response(
    detuning: np.ndarray,
    kappa_m: float,
    kappa_m_ex: float,
    kappa_p: float,
    kappa_p_ex: float,
    g_enh: float,
    optical_offset: float = 0.0,
):
    """Evaluate (s_ee, s_oo, s_oe) of the beam-splitter model on ``detuning``."""
    delta = np.asarray(detuning, dtype=float)
    mw = kappa_m / 2 - 1j * delta
    opt = kappa_p / 2 - 1j * (delta + optical_offset)
    denom = mw * opt + g_enh**2
    s_conv = math.sqrt(kappa_m_ex * kappa_p_ex) * g_enh / denom
    s_ee = 1 - kappa_m_ex * opt / denom
    s_oo = 1 - kappa_p_ex * mw / denom
    return s_ee, s_oo, s_conv


def scattering_spectra(
    spec: TransducerSpec,
    pump: PumpSpec,
    grid: FrequencyGrid,
    optical_offset: float = 0.0,
) -> ScatterSpectra:
    """Spectra of ``spec`` pumped by ``pump`` on an absolute microwave-frequency grid.

    The device's own intra-cavity residual omega_m - (omega_+ - omega_-)
    shifts the converted light off the blue mode; ``optical_offset`` adds a
    further shift (e.g. an inter-cavity mismatch seen by a receiving device).
    """
    mw = saturated_microwave(spec, pump.on_chip_power)
    if abs(grid.center - mw.frequency) > grid.span:
        raise ValueError("grid center must lie within one span of the microwave resonance")
    state = coupling_state(spec, pump)
    detuning = grid.detuning(mw.frequency)
    s_ee, s_oo, s_conv = model_response(
        detuning, mw.kappa_total, mw.kappa_ex,
        spec.blue_mode.kappa_total, spec.blue_mode.kappa_ex,
        state.G_eo, spec.intra_residual + optical_offset,
    )
    return ScatterSpectra(grid, mw.frequency, s_ee=s_ee, s_oo=s_oo, s_oe=s_conv, s_eo=s_conv.copy())


def _edge_mean(power: np.ndarray, fraction: float) -> float:
    n = max(1, int(round(fraction * power.size)))
    return float(np.mean(np.concatenate([power[:n], power[-n:]])))


def calibrate_efficiency(spectra: ScatterSpectra, edge_fraction: float = BACKGROUND_EDGE_FRACTION) -> float:
    """Gain-free efficiency estimate from peak conversion and background reflection.

    Conversion peaks are the maxima of |s|^2 over the grid; reflection
    backgrounds are the mean |s|^2 over the outer ``edge_fraction`` of
    samples at each edge. The estimate is the amplitude ratio
    sqrt(S_oe,pk S_eo,pk / (S_oo,bg S_ee,bg)), in which every input and
    output chain gain cancels.
    """
    p_oe = np.abs(spectra.s_oe) ** 2
    p_eo = np.abs(spectra.s_eo) ** 2
    backgrounds = []
    for label, s in (("s_oo", spectra.s_oo), ("s_ee", spectra.s_ee)):
        power = np.abs(s) ** 2
        bg = _edge_mean(power, edge_fraction)
        if bg <= 0 or bg < _THREE_DB * float(power.min()):
            raise CalibrationWindowError(
                f"{label} background is within 3 dB of its reflection dip; widen the grid"
            )
        backgrounds.append(bg)
    return math.sqrt(float(p_oe.max()) * float(p_eo.max()) / (backgrounds[0] * backgrounds[1]))


def half_power_width(x: np.ndarray, power: np.ndarray) -> float:
    """Full width at half maximum of a single-peaked ``power`` sampled on ``x``."""
    x = np.asarray(x, dtype=float)
    power = np.asarray(power, dtype=float)
    k = int(np.argmax(power))
    half = power[k] / 2
    if not power[k] > 0:
        raise BandwidthUnresolvedError("no conversion peak")

    below = np.nonzero(power[:k] < half)[0]
    above = np.nonzero(power[k + 1:] < half)[0]
    if below.size == 0 or above.size == 0:
        raise BandwidthUnresolvedError("half-power points fall outside the grid")
    i = below[-1]  # power[i] < half <= power[i+1]
    j = k + 1 + above[0]  # power[j-1] >= half > power[j]
    left = x[i] + (half - power[i]) * (x[i + 1] - x[i]) / (power[i + 1] - power[i])
    right = x[j - 1] + (half - power[j - 1]) * (x[j] - x[j - 1]) / (power[j] - power[j - 1])
    return float(right - left)


def conversion_bandwidth(spectra: ScatterSpectra) -> float:
    """3 dB full width of |s_oe|^2 [Hz]."""
    return half_power_width(spectra.detuning, np.abs(spectra.s_oe) ** 2)


_CHANNELS = ("ee", "oo", "oe", "eo")


def _db(power: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 10 * np.log10(power)


def write_spectra_csv(spectra: ScatterSpectra, path: str | Path) -> None:
    header = ["detuning_hz"]
    header += [f"s_{c}_{part}" for c in _CHANNELS for part in ("re", "im")]
    header += [f"s_{c}_db" for c in _CHANNELS]
    columns = [spectra.detuning]
    arrays = [getattr(spectra, f"s_{c}") for c in _CHANNELS]
    for a in arrays:
        columns += [a.real, a.imag]
    columns += [_db(np.abs(a) ** 2) for a in arrays]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])


def read_spectra_csv(path: str | Path) -> ScatterSpectra:
    """Read spectra written by :func:`write_spectra_csv`.

    The returned grid is expressed in detuning (reference frequency 0).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no spectrum rows")
    detuning = np.array([float(r["detuning_hz"]) for r in rows])
    n = detuning.size
    grid = FrequencyGrid(center=float(detuning[n // 2]), span=float(detuning[-1] - detuning[0]), points=n)
    chans = {}
    for c in _CHANNELS:
        chans[f"s_{c}"] = np.array(
            [complex(float(r[f"s_{c}_re"]), float(r[f"s_{c}_im"])) for r in rows]
        )
    return ScatterSpectra(grid, 0.0, **chans)
