"""Built-in device parameter sets and the YAML device-file format.

Device files hold one transducer each. Keys follow the measured-parameter
table of the two fabricated devices, with unit suffixes::

    name: Felix
    omega_minus_hz: 1.9063204e+14
    kappa_minus_in_hz: 1.34e+08
    kappa_minus_ex_hz: 1.02e+08
    kappa_minus_hz: 2.36e+08        # optional, must equal in + ex
    omega_plus_hz: ...
    kappa_plus_in_hz / kappa_plus_ex_hz / kappa_plus_hz
    omega_m_hz / kappa_m_in_hz / kappa_m_ex_hz / kappa_m_hz
    g_eo_hz: 283
    ring_pair: {omega_1_hz, omega_2_hz, g_c_hz, ring_radius_m, fsr_hz}
    tuning: {alpha_1_hz_per_v, alpha_2_hz_per_v, v_min_v, v_max_v}   # optional
    saturation: [[power_w, kappa_m_in_hz], ...]                       # optional
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import yaml

from .model import (
    MicrowaveModeParams,
    OpticalModeParams,
    RingPairSpec,
    TransducerSpec,
    TuningModel,
)

# Shared blue-supermode frequency of both devices at the matched operating point.
MATCHED_BLUE_HZ = 190.6420e12

# Linear tuning coefficient fitted from a 3.8 GHz gap closed by +-160 V on two devices.
FITTED_ALPHA_HZ_PER_V = 3.8e9 / (2 * 160.0)

_TOTAL_RTOL = 1e-9


def _ring_pair_for(blue_at_zero_v: float, omega_m: float, radius: float, fsr: float) -> RingPairSpec:
    # degenerate rings whose splitting equals omega_m
    g_c = omega_m / 2
    return RingPairSpec(blue_at_zero_v - g_c, blue_at_zero_v - g_c, g_c, radius, fsr)


def felix() -> TransducerSpec:
    omega_m = 9.960e9
    return TransducerSpec(
        name="Felix",
        ring_pair=_ring_pair_for(190.6438e12, omega_m, 61.7e-6, 342e9),
        red_mode=OpticalModeParams(MATCHED_BLUE_HZ - omega_m, 134e6, 102e6),
        blue_mode=OpticalModeParams(MATCHED_BLUE_HZ, 118e6, 90e6),
        microwave=MicrowaveModeParams(omega_m, 23.3e6, 14.7e6),
        g_eo=283.0,
        tuning=TuningModel(FITTED_ALPHA_HZ_PER_V, FITTED_ALPHA_HZ_PER_V, -160.0, 160.0),
    )


def albert() -> TransducerSpec:
    omega_m = 4.606e9
    return TransducerSpec(
        name="Albert",
        ring_pair=_ring_pair_for(190.6400e12, omega_m, 60.0e-6, 353e9),
        red_mode=OpticalModeParams(MATCHED_BLUE_HZ - omega_m, 214e6, 77e6),
        blue_mode=OpticalModeParams(MATCHED_BLUE_HZ, 167e6, 50e6),
        microwave=MicrowaveModeParams(omega_m, 2.4e6, 11.5e6),
        g_eo=275.0,
        tuning=TuningModel(FITTED_ALPHA_HZ_PER_V, FITTED_ALPHA_HZ_PER_V, -160.0, 160.0),
    )


BUILTIN = {"felix": felix, "albert": albert}


def _f(doc: Mapping[str, Any], key: str) -> float:
    if key not in doc:
        raise KeyError(f"device file is missing '{key}'")
    # PyYAML reads 1e9 (no sign in exponent) as a string
    return float(doc[key])


def _mode(doc: Mapping[str, Any], prefix: str, cls):
    freq_key = {"minus": "omega_minus_hz", "plus": "omega_plus_hz", "m": "omega_m_hz"}[prefix]
    kin = _f(doc, f"kappa_{prefix}_in_hz")
    kex = _f(doc, f"kappa_{prefix}_ex_hz")
    total_key = f"kappa_{prefix}_hz"
    if total_key in doc:
        total = float(doc[total_key])
        if abs(total - (kin + kex)) > _TOTAL_RTOL * abs(kin + kex):
            raise ValueError(f"{total_key}={total} does not equal in + ex = {kin + kex}")
    return cls(_f(doc, freq_key), kin, kex)


def spec_from_dict(doc: Mapping[str, Any]) -> TransducerSpec:
    rp = doc["ring_pair"]
    ring_pair = RingPairSpec(
        _f(rp, "omega_1_hz"), _f(rp, "omega_2_hz"), _f(rp, "g_c_hz"),
        _f(rp, "ring_radius_m"), _f(rp, "fsr_hz"),
    )
    tuning = None
    if doc.get("tuning") is not None:
        t = doc["tuning"]
        tuning = TuningModel(
            _f(t, "alpha_1_hz_per_v"), _f(t, "alpha_2_hz_per_v"),
            _f(t, "v_min_v"), _f(t, "v_max_v"),
        )
    saturation = doc.get("saturation")
    if saturation is not None:
        saturation = tuple((float(p), float(k)) for p, k in saturation)
    return TransducerSpec(
        name=str(doc.get("name", "device")),
        ring_pair=ring_pair,
        red_mode=_mode(doc, "minus", OpticalModeParams),
        blue_mode=_mode(doc, "plus", OpticalModeParams),
        microwave=_mode(doc, "m", MicrowaveModeParams),
        g_eo=_f(doc, "g_eo_hz"),
        tuning=tuning,
        saturation=saturation,
    )


def spec_to_dict(spec: TransducerSpec) -> dict:
    doc: dict[str, Any] = {"name": spec.name}
    for prefix, mode, fkey in (
        ("minus", spec.red_mode, "omega_minus_hz"),
        ("plus", spec.blue_mode, "omega_plus_hz"),
        ("m", spec.microwave, "omega_m_hz"),
    ):
        doc[fkey] = mode.frequency
        doc[f"kappa_{prefix}_in_hz"] = mode.kappa_in
        doc[f"kappa_{prefix}_ex_hz"] = mode.kappa_ex
        doc[f"kappa_{prefix}_hz"] = mode.kappa_total
    doc["g_eo_hz"] = spec.g_eo
    rp = spec.ring_pair
    doc["ring_pair"] = {
        "omega_1_hz": rp.omega_1, "omega_2_hz": rp.omega_2, "g_c_hz": rp.g_c,
        "ring_radius_m": rp.ring_radius, "fsr_hz": rp.fsr,
    }
    if spec.tuning is not None:
        t = spec.tuning
        doc["tuning"] = {
            "alpha_1_hz_per_v": t.alpha_1, "alpha_2_hz_per_v": t.alpha_2,
            "v_min_v": t.v_min, "v_max_v": t.v_max,
        }
    if spec.saturation is not None:
        doc["saturation"] = [list(row) for row in spec.saturation]
    return doc


def load_device(path: str | Path) -> TransducerSpec:
    """Load a device file, or a built-in preset given as ``builtin:<name>``."""
    text = str(path)
    if text.startswith("builtin:"):
        key = text.split(":", 1)[1].lower()
        if key not in BUILTIN:
            raise KeyError(f"unknown builtin device '{key}'")
        return BUILTIN[key]()
    with open(path, encoding="utf-8") as fh:
        return spec_from_dict(yaml.safe_load(fh))


def save_device(spec: TransducerSpec, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(spec_to_dict(spec), fh, sort_keys=False)
