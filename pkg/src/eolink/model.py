"""Transducer parameters, photonic-molecule hybridization and transduction efficiency.

All rates and frequencies are stored as ordinary frequencies in Hz (the
value ``x`` stands for an angular rate ``2*pi*x``). Conversion to angular
units happens only where a physical constant enters, i.e. in ``hbar*omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constants import HBAR, TWO_PI
from .errors import PumpDetuningError

# Pump must sit within this fraction of the red-mode linewidth.
PUMP_RESONANCE_TOLERANCE = 0.01


def _check_finite(value: float, name: str) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")


def _check_non_negative(value: float, name: str) -> None:
    _check_finite(value, name)
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value}")


def _check_positive(value: float, name: str) -> None:
    _check_finite(value, name)
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class OpticalModeParams:
    """One optical supermode of the photonic molecule.

    Parameters
    ----------
    frequency : float
        Resonance frequency [Hz].
    kappa_in : float
        Intrinsic loss rate [Hz].
    kappa_ex : float
        External (bus-waveguide) coupling rate [Hz].
    """

    frequency: float
    kappa_in: float
    kappa_ex: float

    def __post_init__(self) -> None:
        _check_positive(self.frequency, "frequency")
        _check_non_negative(self.kappa_in, "kappa_in")
        _check_non_negative(self.kappa_ex, "kappa_ex")
        if self.kappa_in + self.kappa_ex <= 0:
            raise ValueError("total loss rate must be positive")

    @property
    def kappa_total(self) -> float:
        return self.kappa_in + self.kappa_ex

    @property
    def extraction_ratio(self) -> float:
        """kappa_ex / kappa_total."""
        return self.kappa_ex / self.kappa_total


@dataclass(frozen=True)
class MicrowaveModeParams(OpticalModeParams):
    """Superconducting resonator mode; same fields and rules as the optical modes."""


@dataclass(frozen=True)
class RingPairSpec:
    """Two evanescently coupled rings at zero tuning voltage.

    ``omega_1``/``omega_2`` are the bare ring resonances and ``g_c`` the
    inter-ring coupling, all in Hz. ``fsr`` is the free spectral range of
    the hybridized comb.
    """

    omega_1: float
    omega_2: float
    g_c: float
    ring_radius: float
    fsr: float

    def __post_init__(self) -> None:
        _check_positive(self.omega_1, "omega_1")
        _check_positive(self.omega_2, "omega_2")
        _check_positive(self.g_c, "g_c")
        _check_positive(self.ring_radius, "ring_radius")
        _check_positive(self.fsr, "fsr")


@dataclass(frozen=True)
class TuningModel:
    """Linear DC tuning of the two bare ring resonances.

    Parameters
    ----------
    alpha_1, alpha_2 : float
        Tuning coefficients of ring 1 and ring 2 [Hz/V].
    v_min, v_max : float
        Allowed voltage window [V], applied to both electrodes.
    """

    alpha_1: float
    alpha_2: float
    v_min: float = -160.0
    v_max: float = 160.0

    def __post_init__(self) -> None:
        _check_finite(self.alpha_1, "alpha_1")
        _check_finite(self.alpha_2, "alpha_2")
        _check_finite(self.v_min, "v_min")
        _check_finite(self.v_max, "v_max")
        if not self.v_min < self.v_max:
            raise ValueError(f"v_min must be below v_max, got [{self.v_min}, {self.v_max}]")


@dataclass(frozen=True)
class TransducerSpec:
    """Complete parameter set of one transducer.

    ``red_mode`` and ``blue_mode`` describe the operating point (the pumped
    and the signal supermode). ``ring_pair`` holds the untuned bare-ring
    resonances used for frequency matching. ``saturation`` is an optional
    table of ``(on_chip_power_w, kappa_m_in_hz)`` rows with strictly
    increasing power, linearly interpolated and clamped at both ends.
    """

    name: str
    ring_pair: RingPairSpec
    red_mode: OpticalModeParams
    blue_mode: OpticalModeParams
    microwave: MicrowaveModeParams
    g_eo: float
    tuning: Optional[TuningModel] = None
    saturation: Optional[tuple] = field(default=None)

    def __post_init__(self) -> None:
        _check_finite(self.g_eo, "g_eo")
        if not self.blue_mode.frequency > self.red_mode.frequency:
            raise ValueError("blue_mode frequency must exceed red_mode frequency")
        if self.saturation is not None:
            table = tuple((float(p), float(k)) for p, k in self.saturation)
            if not table:
                raise ValueError("saturation table must not be empty")
            powers = [p for p, _ in table]
            if any(b <= a for a, b in zip(powers, powers[1:])):
                raise ValueError("saturation powers must be strictly increasing")
            for p, k in table:
                _check_non_negative(p, "saturation power")
                _check_non_negative(k, "saturation kappa_m_in")
            object.__setattr__(self, "saturation", table)

    @property
    def intra_residual(self) -> float:
        """omega_m - (omega_plus - omega_minus) [Hz]."""
        return self.microwave.frequency - (self.blue_mode.frequency - self.red_mode.frequency)


@dataclass(frozen=True)
class PumpSpec:
    on_chip_power: float  # W, peak during the pulse
    pump_frequency: float  # Hz

    def __post_init__(self) -> None:
        _check_non_negative(self.on_chip_power, "on_chip_power")
        _check_positive(self.pump_frequency, "pump_frequency")


@dataclass(frozen=True)
class CouplingState:
    n_minus: float
    G_eo: float  # Hz
    cooperativity: float


def hybridize(ring_pair: RingPairSpec) -> tuple[float, float, float]:
    """Supermode frequencies of two coupled rings.

    Returns
    -------
    omega_plus, omega_minus : float
        Blue and red supermode frequencies [Hz].
    theta : float
        Mixing angle in (0, pi/2) with tan(2 theta) = 2 g_c / (omega_1 - omega_2).
    """
    mean = 0.5 * (ring_pair.omega_1 + ring_pair.omega_2)
    half_diff = 0.5 * (ring_pair.omega_1 - ring_pair.omega_2)
    half_split = math.hypot(ring_pair.g_c, half_diff)
    theta = 0.5 * math.atan2(2.0 * ring_pair.g_c, ring_pair.omega_1 - ring_pair.omega_2)
    return mean + half_split, mean - half_split, theta


def pump_photon_number(
    red_mode: OpticalModeParams,
    pump: PumpSpec,
    tolerance: float = PUMP_RESONANCE_TOLERANCE,
) -> float:
    """Intra-cavity photon number of an on-resonance pump in the red supermode.

    ``tolerance`` is the allowed pump detuning as a fraction of the red-mode
    total linewidth.
    """
    detuning = abs(pump.pump_frequency - red_mode.frequency)
    if detuning > tolerance * red_mode.kappa_total:
        raise PumpDetuningError(
            f"pump at {pump.pump_frequency!r} Hz is {detuning:.6g} Hz off the red mode "
            f"(limit {tolerance * red_mode.kappa_total:.6g} Hz)"
        )
    photon_flux = pump.on_chip_power / (HBAR * TWO_PI * red_mode.frequency)
    # 4 kappa_ex / kappa^2 with both rates angular
    return photon_flux * 4.0 * red_mode.kappa_ex / (TWO_PI * red_mode.kappa_total**2)


def saturated_microwave(spec: TransducerSpec, power: float) -> MicrowaveModeParams:
    """Microwave mode with kappa_in replaced by the saturation-table value at ``power``."""
    if spec.saturation is None:
        return spec.microwave
    powers, kappas = zip(*spec.saturation)
    kappa_in = float(np.interp(power, powers, kappas))
    return MicrowaveModeParams(spec.microwave.frequency, kappa_in, spec.microwave.kappa_ex)


def coupling_state(spec: TransducerSpec, pump: PumpSpec) -> CouplingState:
    microwave = saturated_microwave(spec, pump.on_chip_power)
    n_minus = pump_photon_number(spec.red_mode, pump)
    g_enh = math.sqrt(n_minus) * spec.g_eo
    coop = 4.0 * g_enh**2 / (microwave.kappa_total * spec.blue_mode.kappa_total)
    return CouplingState(n_minus=n_minus, G_eo=g_enh, cooperativity=coop)


def efficiency_from_cooperativity(
    cooperativity: float, blue_mode: OpticalModeParams, microwave: MicrowaveModeParams
) -> float:
    c = cooperativity
    return blue_mode.extraction_ratio * microwave.extraction_ratio * 4.0 * c / (1.0 + c) ** 2


def efficiency(spec: TransducerSpec, pump: PumpSpec) -> tuple[float, CouplingState]:
    """On-chip microwave-optical conversion efficiency.

    Returns the efficiency together with the pump photon number, enhanced
    coupling and cooperativity it was computed from. With a saturation
    table present, the microwave intrinsic loss is taken at the pump power.
    """
    state = coupling_state(spec, pump)
    microwave = saturated_microwave(spec, pump.on_chip_power)
    return efficiency_from_cooperativity(state.cooperativity, spec.blue_mode, microwave), state


def efficiency_sweep(spec: TransducerSpec, powers: Sequence[float]) -> list[tuple[float, float]]:
    if len(powers) == 0:
        raise ValueError("powers must be non-empty")
    out = []
    for p in powers:
        eta, _ = efficiency(spec, PumpSpec(float(p), spec.red_mode.frequency))
        out.append((float(p), eta))
    return out
