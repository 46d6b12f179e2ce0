"""
Classical-field bookkeeping for the bosonized description.

Phase fields ``phi_s`` (density) and ``theta_s`` (phase) of the two
species are rotated into charge and spin combinations, and densities are
rebuilt from their lowest harmonics.  All fields are plain real arrays on
a uniform grid; nothing here is operator valued.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SQRT2 = math.sqrt(2.0)


def _check_lengths(arrays):
    n = {len(a) for a in arrays}
    if len(n) != 1:
        raise ValueError(f"field arrays have mismatched lengths {sorted(n)}")


@dataclass(frozen=True)
class PhaseFields:
    phi_up: np.ndarray
    phi_down: np.ndarray
    theta_up: np.ndarray
    theta_down: np.ndarray
    dz: float

    def __post_init__(self):
        arrays = (self.phi_up, self.phi_down, self.theta_up, self.theta_down)
        _check_lengths(arrays)
        if not self.dz > 0:
            raise ValueError("dz must be > 0")
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("phase fields must be finite")


@dataclass(frozen=True)
class SectorFields:
    phi_charge: np.ndarray
    phi_spin: np.ndarray
    theta_charge: np.ndarray
    theta_spin: np.ndarray
    dz: float

    def __post_init__(self):
        _check_lengths((self.phi_charge, self.phi_spin, self.theta_charge, self.theta_spin))
        if not self.dz > 0:
            raise ValueError("dz must be > 0")


def to_sectors(f):
    """Charge/spin combinations ``(x_up +- x_down)/sqrt(2)`` of phi and theta."""
    up = np.asarray(f.phi_up, dtype=float), np.asarray(f.theta_up, dtype=float)
    down = np.asarray(f.phi_down, dtype=float), np.asarray(f.theta_down, dtype=float)
    return SectorFields(
        phi_charge=(up[0] + down[0]) / _SQRT2,
        phi_spin=(up[0] - down[0]) / _SQRT2,
        theta_charge=(up[1] + down[1]) / _SQRT2,
        theta_spin=(up[1] - down[1]) / _SQRT2,
        dz=f.dz,
    )


def from_sectors(s):
    """Inverse of `to_sectors`."""
    c = np.asarray(s.phi_charge, dtype=float), np.asarray(s.theta_charge, dtype=float)
    sp = np.asarray(s.phi_spin, dtype=float), np.asarray(s.theta_spin, dtype=float)
    return PhaseFields(
        phi_up=(c[0] + sp[0]) / _SQRT2,
        phi_down=(c[0] - sp[0]) / _SQRT2,
        theta_up=(c[1] + sp[1]) / _SQRT2,
        theta_down=(c[1] - sp[1]) / _SQRT2,
        dz=s.dz,
    )


def _gradient(f, dz, periodic):
    if periodic:
        return (np.roll(f, -1) - np.roll(f, 1)) / (2 * dz)
    return np.gradient(f, dz)


def reconstruct_densities(s, rho0, m_max=1, periodic=True):
    """Charge and spin densities from the sector fields, harmonics |m| <= m_max.

    ``rho_charge = rho0 - (sqrt2/pi) d phi_c + 2 rho0 cos(2kF z - sqrt2 phi_c) cos(sqrt2 phi_s)``
    ``rho_spin = -(sqrt2/pi) d phi_s + 2 rho0 sin(2kF z - sqrt2 phi_c) sin(sqrt2 phi_s)``

    with the oscillating terms present only for ``m_max = 1``.  The grid
    starts at z = 0.
    """
    if m_max not in (0, 1):
        raise ValueError(f"m_max must be 0 or 1, got {m_max!r}")
    if not rho0 > 0:
        raise ValueError("rho0 must be > 0")
    phi_c = np.asarray(s.phi_charge, dtype=float)
    phi_s = np.asarray(s.phi_spin, dtype=float)
    # Each species carries rho0/2, so the per-species harmonic
    # exp(2im(pi rho0_s z - phi_s)) summed over species gives
    # cos(2 kF z - sqrt2 phi_c) with kF = pi rho0_s = pi rho0 / 2.
    k_f = 0.5 * math.pi * rho0
    rho_c = rho0 - (_SQRT2 / math.pi) * _gradient(phi_c, s.dz, periodic)
    rho_s = -(_SQRT2 / math.pi) * _gradient(phi_s, s.dz, periodic)
    if m_max == 1:
        z = np.arange(len(phi_c)) * s.dz
        arg = 2 * k_f * z - _SQRT2 * phi_c
        rho_c = rho_c + 2 * rho0 * np.cos(arg) * np.cos(_SQRT2 * phi_s)
        rho_s = rho_s + 2 * rho0 * np.sin(arg) * np.sin(_SQRT2 * phi_s)
    return rho_c, rho_s


def single_species_density(phi, rho0_s, m_max, dz, periodic=False):
    """``[rho0_s + d phi/pi] * sum_{|m|<=m_max} exp(im(2 pi rho0_s z + 2 phi))``, real part.

    The gradient enters with a plus sign here, unlike the two-species
    expressions in `reconstruct_densities`.
    """
    m_max = int(m_max)
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    phi = np.asarray(phi, dtype=float)
    z = np.arange(len(phi)) * dz
    arg = 2 * math.pi * rho0_s * z + 2 * phi
    harmonics = 1 + 2 * sum(np.cos(m * arg) for m in range(1, m_max + 1))
    return (rho0_s + _gradient(phi, dz, periodic) / math.pi) * harmonics
