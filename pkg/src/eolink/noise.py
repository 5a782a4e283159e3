"""Output noise spectrum and microwave-mode thermal occupancy.

The reflected noise seen at the output line is

    S_dev(w) = R(w) n_ex + (1 - R(w)) n_en + dn_out_add

and the mode occupancy is the loss-weighted mean

    n_mode = (kappa_m,in n_en + kappa_m,ex n_ex) / (kappa_m,in + kappa_m,ex).

Note the pairing: ``n_en`` goes with the *intrinsic* loss and ``n_ex`` with
the *external* loss. Descriptive labels for these baths are sometimes
given the other way round; the pairing above is what is implemented.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InfeasibleInputError, UninvertibleError
from .model import MicrowaveModeParams
from .spectra import FrequencyGrid


@dataclass(frozen=True)
class BathOccupancies:
    n_ex: float
    n_en: float
    delta_n_out_add: float = 0.0

    def __post_init__(self) -> None:
        for name in ("n_ex", "n_en", "delta_n_out_add"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")


@dataclass(frozen=True, eq=False)
class NoiseSpectrum:
    grid: FrequencyGrid
    s_dev: np.ndarray
    n_mode: float


def _reflection(mw: MicrowaveModeParams, detuning):
    return np.abs(1 - mw.kappa_ex / (mw.kappa_total / 2 - 1j * np.asarray(detuning, dtype=float))) ** 2


def reflection_spectrum(mw: MicrowaveModeParams, grid: FrequencyGrid) -> np.ndarray:
    """Power reflection |s_ee|^2 of the unpumped resonator on an absolute grid."""
    return _reflection(mw, grid.detuning(mw.frequency))


def reflection_on_resonance(mw: MicrowaveModeParams) -> float:
    return float(_reflection(mw, 0.0))


def mode_occupancy(mw: MicrowaveModeParams, baths: BathOccupancies) -> float:
    return (mw.kappa_in * baths.n_en + mw.kappa_ex * baths.n_ex) / mw.kappa_total


def output_noise_spectrum(
    mw: MicrowaveModeParams, baths: BathOccupancies, grid: FrequencyGrid
) -> NoiseSpectrum:
    r = reflection_spectrum(mw, grid)
    s_dev = r * baths.n_ex + (1 - r) * baths.n_en + baths.delta_n_out_add
    return NoiseSpectrum(grid=grid, s_dev=s_dev, n_mode=mode_occupancy(mw, baths))


def infer_baths(
    s_dev_on_resonance: float,
    s_dev_off_resonance: float,
    mw: MicrowaveModeParams,
    delta_n_out_add: float = 0.0,
) -> BathOccupancies:
    """Invert the noise model from two readings.

    Far off resonance R = 1, so that reading fixes ``n_ex``; the on-resonance
    reading (R = R(w_m)) then fixes ``n_en``.
    """
    r0 = reflection_on_resonance(mw)
    if r0 == 1.0:
        raise UninvertibleError("R(w_m) = 1: on- and off-resonance readings are degenerate")
    n_ex = s_dev_off_resonance - delta_n_out_add
    n_en = (s_dev_on_resonance - delta_n_out_add - r0 * n_ex) / (1 - r0)
    if n_ex < 0:
        raise InfeasibleInputError(
            f"inferred n_ex = {n_ex:.6g} < 0: added noise exceeds the off-resonance level"
        )
    if n_en < 0:
        raise InfeasibleInputError(f"inferred n_en = {n_en:.6g} < 0")
    return BathOccupancies(n_ex=n_ex, n_en=n_en, delta_n_out_add=delta_n_out_add)


def write_noise_spectrum_csv(spectrum: NoiseSpectrum, reference: float, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["detuning_hz", "s_dev"])
        for d, s in zip(spectrum.grid.detuning(reference), spectrum.s_dev):
            w.writerow([repr(float(d)), repr(float(s))])
