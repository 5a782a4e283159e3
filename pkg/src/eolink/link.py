"""Fridge-to-fridge microwave-optical-microwave link and the link-budget comparison."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import IncompatibleGridsError
from .model import PumpSpec, TransducerSpec
from .spectra import FrequencyGrid, ScatterSpectra, half_power_width, scattering_spectra

DEFAULT_EFFECTIVE_INDEX = 1.468
DEFAULT_CARRIER_HZ = 190.6420e12

# Budget reference levels [dB of loss]
COAX_DB_PER_M = 1.0
FIBER_DB_PER_KM = 0.2
EOM_PAIR_DB = 140.0
TRANSDUCER_PAIR_ONCHIP_DB = 60.0
FIBER_TO_CHIP_TOTAL_DB = 23.7

TECHNOLOGIES = ("coax", "eom_pair", "transducer_pair_onchip", "transducer_pair_offchip")


@dataclass(frozen=True)
class FiberSpec:
    length: float  # m
    attenuation: float = FIBER_DB_PER_KM  # dB/km
    effective_index: float = DEFAULT_EFFECTIVE_INDEX
    carrier_frequency: float = DEFAULT_CARRIER_HZ  # Hz

    def __post_init__(self) -> None:
        if not self.length >= 0:
            raise ValueError("fiber length must be non-negative")
        if not self.attenuation >= 0:
            raise ValueError("attenuation must be non-negative")
        if not self.effective_index >= 1:
            raise ValueError("effective_index must be >= 1")
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be positive")


@dataclass(frozen=True)
class CouplerSpec:
    insertion_loss_db: float = 5.93  # per pass
    passes: int = 4

    def __post_init__(self) -> None:
        if not self.insertion_loss_db >= 0:
            raise ValueError("insertion loss must be non-negative")
        if int(self.passes) != self.passes or self.passes < 0:
            raise ValueError("passes must be a non-negative integer")

    @property
    def total_db(self) -> float:
        return self.insertion_loss_db * self.passes

    @property
    def amplitude(self) -> float:
        return 10 ** (-self.total_db / 20)


@dataclass(frozen=True, eq=False)
class LinkResponse:
    grid: FrequencyGrid
    detuning: np.ndarray
    s_link: np.ndarray
    peak_transmission_db: float
    bandwidth: float


@dataclass(frozen=True)
class BudgetEntry:
    technology: str
    distance: float  # m
    total_loss_db: float


def fiber_response(fiber: FiberSpec) -> complex:
    """Complex field transmission of the fiber at the carrier frequency."""
    if fiber.length == 0:
        return 1 + 0j
    amplitude = 10 ** (-fiber.attenuation * fiber.length / 1e3 / 20)
    cycles = fiber.effective_index * fiber.length * fiber.carrier_frequency / SPEED_OF_LIGHT
    phase = -2 * math.pi * math.fmod(cycles, 1.0)
    return amplitude * complex(math.cos(phase), math.sin(phase))


def _same_grid(a: ScatterSpectra, b: ScatterSpectra) -> bool:
    if a.grid.points != b.grid.points:
        return False
    da, db = a.detuning, b.detuning
    scale = max(float(np.max(np.abs(da))), 1.0)
    return bool(np.allclose(da, db, rtol=0, atol=1e-9 * scale))


def cascade(
    felix_spectra: ScatterSpectra,
    albert_spectra: ScatterSpectra,
    fiber: FiberSpec,
    couplers: Optional[CouplerSpec] = None,
) -> LinkResponse:
    """M2O at Felix, fiber, O2M at Albert, indexed by the common detuning.

    Both spectra must be on the same detuning axis relative to their own
    microwave resonances.
    """
    if not _same_grid(felix_spectra, albert_spectra):
        raise IncompatibleGridsError("Felix and Albert spectra are not on the same detuning grid")
    path = fiber_response(fiber) * (couplers.amplitude if couplers is not None else 1.0)
    s_link = albert_spectra.s_eo * path * felix_spectra.s_oe
    power = np.abs(s_link) ** 2
    peak = float(power.max())
    peak_db = 10 * math.log10(peak) if peak > 0 else -math.inf
    detuning = felix_spectra.detuning
    bandwidth = half_power_width(detuning, power) if peak > 0 else math.nan
    return LinkResponse(
        grid=felix_spectra.grid,
        detuning=detuning,
        s_link=s_link,
        peak_transmission_db=peak_db,
        bandwidth=bandwidth,
    )


def link_response(
    felix: TransducerSpec,
    albert: TransducerSpec,
    felix_power: float,
    albert_power: float,
    span: float,
    points: int,
    fiber: FiberSpec,
    couplers: Optional[CouplerSpec] = None,
    inter_residual: float = 0.0,
) -> LinkResponse:
    """Build both devices' spectra on a shared detuning grid and cascade them.

    ``inter_residual`` is the blue-mode frequency of Felix minus that of
    Albert; light arriving at Albert is detuned from its blue mode by it.
    """
    fs = scattering_spectra(
        felix, PumpSpec(felix_power, felix.red_mode.frequency),
        FrequencyGrid(felix.microwave.frequency, span, points),
    )
    as_ = scattering_spectra(
        albert, PumpSpec(albert_power, albert.red_mode.frequency),
        FrequencyGrid(albert.microwave.frequency, span, points),
        optical_offset=inter_residual,
    )
    return cascade(fs, as_, fiber, couplers)


def budget_table(
    distances: Sequence[float],
    coupling_loss_db: float = FIBER_TO_CHIP_TOTAL_DB,
    fiber_db_per_km: float = FIBER_DB_PER_KM,
) -> list[BudgetEntry]:
    """Total link loss of each technology at each distance (rows grouped by distance)."""
    rows = []
    for d in distances:
        d = float(d)
        if not d >= 0:
            raise ValueError(f"distance must be non-negative, got {d}")
        fiber_db = fiber_db_per_km * d / 1e3
        rows += [
            BudgetEntry("coax", d, COAX_DB_PER_M * d),
            BudgetEntry("eom_pair", d, EOM_PAIR_DB + fiber_db),
            BudgetEntry("transducer_pair_onchip", d, TRANSDUCER_PAIR_ONCHIP_DB + fiber_db),
            BudgetEntry(
                "transducer_pair_offchip", d, TRANSDUCER_PAIR_ONCHIP_DB + coupling_loss_db + fiber_db
            ),
        ]
    return rows


def write_budget_csv(rows: Sequence[BudgetEntry], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["technology", "distance_m", "loss_db"])
        for r in rows:
            w.writerow([r.technology, repr(r.distance), repr(r.total_loss_db)])


def write_link_csv(response: LinkResponse, path: str | Path) -> None:
    power = np.abs(response.s_link) ** 2
    with np.errstate(divide="ignore"):
        mag_db = 10 * np.log10(power)
    phase = np.angle(response.s_link)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["detuning_hz", "re", "im", "mag_db", "phase_rad"])
        for row in zip(response.detuning, response.s_link.real, response.s_link.imag, mag_db, phase):
            w.writerow([repr(float(v)) for v in row])
