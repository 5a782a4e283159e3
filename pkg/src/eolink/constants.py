"""Physical constants (CODATA 2018) used throughout the package."""

import math

HBAR = 1.054571817e-34  # J s
EPSILON_0 = 8.8541878128e-12  # F/m
SPEED_OF_LIGHT = 299792458.0  # m/s
TWO_PI = 2.0 * math.pi
