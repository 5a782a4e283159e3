"""Single-photon electro-optic coupling rate from transverse field profiles.

The optical TM profile ``u_oz`` and the microwave transverse components
``u_mr``, ``u_mz`` are sampled on a shared rectilinear (r, z) grid. Both
rings are assumed identical and confined near radius R, so the volume
integrals reduce to 2*pi*R (optical) and 4*pi*R (microwave, two rings)
times an area integral over the cross-section, evaluated here with the
trapezoidal rule.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.integrate import trapezoid

from .constants import EPSILON_0, HBAR, TWO_PI
from .errors import DegenerateProfileError

_ARRAY_FIELDS = ("u_oz", "u_mr", "u_mz", "eps_ozz", "eps_mrr", "eps_mzz")


@dataclass(frozen=True, eq=False)
class FieldProfileSet:
    """Discretized cross-section fields.

    Parameters
    ----------
    grid_r, grid_z : ndarray
        Strictly increasing radial and vertical coordinates [m].
    u_oz, u_mr, u_mz : ndarray, shape (len(grid_r), len(grid_z))
        Field profiles in arbitrary units.
    eps_ozz, eps_mrr, eps_mzz : ndarray, same shape
        Relative permittivities seen by the optical z and microwave r/z components.
    r33 : float
        Pockels coefficient [m/V].
    ring_radius : float
        Ring radius [m].
    omega_o, omega_m : float
        Optical and microwave frequencies [Hz].
    """

    grid_r: np.ndarray
    grid_z: np.ndarray
    u_oz: np.ndarray
    u_mr: np.ndarray
    u_mz: np.ndarray
    eps_ozz: np.ndarray
    eps_mrr: np.ndarray
    eps_mzz: np.ndarray
    r33: float
    ring_radius: float
    omega_o: float
    omega_m: float

    def __post_init__(self) -> None:
        for name in ("grid_r", "grid_z"):
            g = np.asarray(getattr(self, name), dtype=float)
            if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0):
                raise ValueError(f"{name} must be a strictly increasing 1-D array")
            object.__setattr__(self, name, g)
        shape = (self.grid_r.size, self.grid_z.size)
        for name in _ARRAY_FIELDS:
            arr = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), shape)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            object.__setattr__(self, name, arr)
        for name in ("eps_ozz", "eps_mrr", "eps_mzz"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"{name} must be non-negative")
        if self.r33 < 0:
            raise ValueError("r33 must be non-negative")
        if self.ring_radius <= 0:
            raise ValueError("ring_radius must be positive")
        if self.omega_o <= 0 or self.omega_m <= 0:
            raise ValueError("frequencies must be positive")


@dataclass(frozen=True)
class OverlapResult:
    """g_eo [Hz] and the ingredients it was built from.

    Mode volumes are in m^3 times the squared profile units;
    ``overlap_numerator`` is the area integral of eps_ozz^2 r33 |u_oz|^2 u_mz
    in m/V * m^2 * [u_o]^2 [u_m].
    """

    g_eo: float
    v_eff_optical: float
    v_eff_microwave: float
    overlap_numerator: float


def _area_integral(values: np.ndarray, grid_r: np.ndarray, grid_z: np.ndarray) -> float:
    return float(trapezoid(trapezoid(values, grid_z, axis=1), grid_r))


def compute_geo(profiles: FieldProfileSet) -> OverlapResult:
    p = profiles
    uo2 = np.abs(p.u_oz) ** 2
    numerator = _area_integral(p.eps_ozz**2 * p.r33 * uo2 * p.u_mz, p.grid_r, p.grid_z)
    norm_o = _area_integral(p.eps_ozz * uo2, p.grid_r, p.grid_z)
    norm_m = _area_integral(
        p.eps_mrr * np.abs(p.u_mr) ** 2 + p.eps_mzz * np.abs(p.u_mz) ** 2, p.grid_r, p.grid_z
    )
    if norm_o <= 0:
        raise DegenerateProfileError("optical normalization integral is zero")
    if norm_m <= 0:
        raise DegenerateProfileError("microwave normalization integral is zero")

    w_o = TWO_PI * p.omega_o
    w_m = TWO_PI * p.omega_m
    # hbar*w_o*w_o*w_m, i.e. w_o squared
    prefactor = math.sqrt(HBAR * w_o * w_o * w_m / (8.0 * math.pi * EPSILON_0 * p.ring_radius))
    g_angular = prefactor * (numerator / norm_o) / math.sqrt(norm_m)
    return OverlapResult(
        g_eo=g_angular / TWO_PI,
        v_eff_optical=TWO_PI * p.ring_radius * norm_o,
        v_eff_microwave=2.0 * TWO_PI * p.ring_radius * norm_m,
        overlap_numerator=numerator,
    )


def read_profile(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray, str]:
    """Read a columnar ``r_m, z_m, <component>`` CSV into a gridded array.

    Rows may come in any order but must cover the full tensor grid exactly once.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if len(header) != 3:
            raise ValueError(f"{path}: expected 3 columns (r_m, z_m, component), got {header}")
        rows = np.array([[float(x) for x in row] for row in reader if row], dtype=float)
    r_vals, r_idx = np.unique(rows[:, 0], return_inverse=True)
    z_vals, z_idx = np.unique(rows[:, 1], return_inverse=True)
    if rows.shape[0] != r_vals.size * z_vals.size:
        raise ValueError(f"{path}: samples do not form a complete rectilinear grid")
    grid = np.full((r_vals.size, z_vals.size), np.nan)
    grid[r_idx, z_idx] = rows[:, 2]
    if np.isnan(grid).any():
        raise ValueError(f"{path}: duplicated grid points")
    return r_vals, z_vals, grid, header[2]


def write_profile(path: str | Path, grid_r, grid_z, values, component: str) -> None:
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["r_m", "z_m", component])
        for i, r in enumerate(grid_r):
            for j, z in enumerate(grid_z):
                w.writerow([repr(float(r)), repr(float(z)), repr(float(values[i, j]))])


def load_profile_set(
    paths: Mapping[str, str | Path],
    r33: float,
    ring_radius: float,
    omega_o: float,
    omega_m: float,
    constants: Mapping[str, float] | None = None,
) -> FieldProfileSet:
    """Build a :class:`FieldProfileSet` from one file per component.

    ``paths`` maps component names (``u_oz``, ``u_mr``, ...) to files;
    ``constants`` supplies uniform values for components without a file.
    All files must share the same grid.
    """
    constants = dict(constants or {})
    arrays: dict[str, np.ndarray] = {}
    grid_r = grid_z = None
    for name, path in paths.items():
        if name not in _ARRAY_FIELDS:
            raise ValueError(f"unknown profile component '{name}'")
        r, z, values, _ = read_profile(path)
        if grid_r is None:
            grid_r, grid_z = r, z
        elif not (np.array_equal(r, grid_r) and np.array_equal(z, grid_z)):
            raise ValueError(f"{path}: grid differs from the other profile files")
        arrays[name] = values
    if grid_r is None:
        raise ValueError("at least one profile file is required")
    for name in _ARRAY_FIELDS:
        if name not in arrays:
            if name not in constants:
                raise ValueError(f"no file or constant given for '{name}'")
            arrays[name] = np.full((grid_r.size, grid_z.size), float(constants[name]))
    return FieldProfileSet(
        grid_r=grid_r, grid_z=grid_z, r33=r33, ring_radius=ring_radius,
        omega_o=omega_o, omega_m=omega_m, **arrays,
    )
