"""Shared helpers and independent oracles for the test suite."""

import math

from eolink.model import PumpSpec


def pump_at(spec, power):
    return PumpSpec(power, spec.red_mode.frequency)


def half_power_width_closed_form(kappa_m, kappa_p, g_enh):
    """3 dB full width of |s_oe|^2 for the matched beam-splitter model.

    Solves |D(delta)|^2 = 2|D(0)|^2, a quadratic in delta^2, with
    D = (a - i delta)(b - i delta) + G^2, a = kappa_m/2, b = kappa_p/2.
    """
    a, b = kappa_m / 2, kappa_p / 2
    c = a * b + g_enh**2
    bq = (a + b) ** 2 - 2 * c
    x = (-bq + math.sqrt(bq * bq + 4 * c * c)) / 2
    return 2 * math.sqrt(x)
