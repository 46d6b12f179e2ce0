"""Optical knobs -> effective two-component Lieb-Liniger model -> Luttinger parameters.

All quantities are in normalized units with hbar = 1.  The chain is

    OpticalConfig --derive_effective--> EffectiveLiebLiniger
                  --derive_luttinger--> LuttingerParameters

with `check_repulsive` and `check_separation` guarding the two steps.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

DEFAULT_SEPARATION_TOL = 1e-6

_DETUNINGS = (
    "delta_up",
    "delta_down",
    "delta_upup",
    "delta_downdown",
    "delta_updown",
    "delta_downup",
)
_POSITIVE = (
    "omega_up",
    "omega_down",
    "coupling_g",
    "atom_density_up",
    "atom_density_down",
    "photon_density_up",
    "photon_density_down",
    "waveguide_velocity",
    "optical_depth",
)

MIN_DENSITY_RATIO = 1e2
GOOD_DENSITY_RATIO = 1e4


class ParameterError(ValueError):
    """An input violates a physical-parameter invariant."""


class RegimeError(ValueError):
    """The parameters are valid but outside the regime a derivation needs."""


class AdiabaticityWarning(UserWarning):
    """Atom-to-photon density ratio below the comfortable 1e4."""


@dataclass(frozen=True)
class OpticalConfig:
    """Laboratory knobs of the two-polarization waveguide.

    Detunings and Rabi frequencies are in rad/time, densities in 1/length.
    ``optical_depth`` and ``cooperativity`` are carried as metadata only.
    """

    delta_up: float
    delta_down: float
    delta_upup: float
    delta_downdown: float
    delta_updown: float
    delta_downup: float
    omega_up: float
    omega_down: float
    coupling_g: float
    atom_density_up: float
    atom_density_down: float
    photon_density_up: float
    photon_density_down: float
    waveguide_velocity: float
    optical_depth: float = 2000.0
    cooperativity: float = 0.4

    def __post_init__(self):
        for name in _DETUNINGS:
            v = getattr(self, name)
            if not math.isfinite(v) or v == 0:
                raise ParameterError(f"{name} must be a finite nonzero detuning, got {v!r}")
        for name in _POSITIVE:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {v!r}")
        if not 0 < self.cooperativity < 1:
            raise ParameterError(f"cooperativity must lie in (0, 1), got {self.cooperativity!r}")
        for s in ("up", "down"):
            ratio = getattr(self, f"atom_density_{s}") / getattr(self, f"photon_density_{s}")
            if ratio < MIN_DENSITY_RATIO:
                raise ParameterError(
                    f"atom_density_{s}/photon_density_{s} = {ratio:.3g} is below "
                    f"{MIN_DENSITY_RATIO:g}; the polariton equations do not apply"
                )
            if ratio < GOOD_DENSITY_RATIO:
                warnings.warn(
                    f"atom_density_{s}/photon_density_{s} = {ratio:.3g} < {GOOD_DENSITY_RATIO:g}",
                    AdiabaticityWarning,
                    stacklevel=3,
                )

    def swapped(self):
        """The same configuration with the species labels exchanged."""
        return OpticalConfig(
            delta_up=self.delta_down,
            delta_down=self.delta_up,
            delta_upup=self.delta_downdown,
            delta_downdown=self.delta_upup,
            delta_updown=self.delta_downup,
            delta_downup=self.delta_updown,
            omega_up=self.omega_down,
            omega_down=self.omega_up,
            coupling_g=self.coupling_g,
            atom_density_up=self.atom_density_down,
            atom_density_down=self.atom_density_up,
            photon_density_up=self.photon_density_down,
            photon_density_down=self.photon_density_up,
            waveguide_velocity=self.waveguide_velocity,
            optical_depth=self.optical_depth,
            cooperativity=self.cooperativity,
        )


@dataclass(frozen=True)
class EffectiveLiebLiniger:
    """Parameters of the effective two-component Lieb-Liniger model.

    ``chi_cross`` is the Hamiltonian inter-species coupling, summed over
    both species.  ``cross_up`` and ``cross_down`` are the per-equation
    coefficients of the other species' density in each polariton's
    equation of motion; the dynamics uses those.
    """

    mass_up: float
    mass_down: float
    chi_up: float
    chi_down: float
    chi_cross: float
    cross_up: float
    cross_down: float
    density_up: float
    density_down: float
    group_velocity_up: float | None = None
    group_velocity_down: float | None = None
    gamma_1d_up: float | None = None
    gamma_1d_down: float | None = None

    def __post_init__(self):
        if not (self.density_up > 0 and self.density_down > 0):
            raise ParameterError("densities must be > 0")
        if self.mass_up == 0 or self.mass_down == 0:
            raise ParameterError("effective masses must be nonzero")

    @classmethod
    def symmetric(cls, mass, chi, cross, density):
        """Identical species with per-equation cross coupling `cross`."""
        return cls(
            mass_up=mass,
            mass_down=mass,
            chi_up=chi,
            chi_down=chi,
            chi_cross=2 * cross,
            cross_up=cross,
            cross_down=cross,
            density_up=density,
            density_down=density,
        )

    @property
    def total_density(self):
        return self.density_up + self.density_down

    def swapped(self):
        return EffectiveLiebLiniger(
            mass_up=self.mass_down,
            mass_down=self.mass_up,
            chi_up=self.chi_down,
            chi_down=self.chi_up,
            chi_cross=self.chi_cross,
            cross_up=self.cross_down,
            cross_down=self.cross_up,
            density_up=self.density_down,
            density_down=self.density_up,
            group_velocity_up=self.group_velocity_down,
            group_velocity_down=self.group_velocity_up,
            gamma_1d_up=self.gamma_1d_down,
            gamma_1d_down=self.gamma_1d_up,
        )

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LuttingerParameters:
    """Luttinger-liquid description of the separated two-component gas.

    ``u`` and ``k_param`` are the single-species velocity and Luttinger
    parameter; the sector values follow from ``ratio_cross = chi_cross/chi``
    as ``u*sqrt(1 +- r)`` and ``K/sqrt(1 +- r)``.
    """

    gamma_up: float
    gamma_down: float
    u: float
    k_param: float
    u_charge: float
    u_spin: float
    k_charge: float
    k_spin: float
    ratio_cross: float

    @classmethod
    def from_sectors(cls, u_charge, u_spin, k_charge, k_spin, rtol=1e-9):
        """Build from the four sector values, checking they are consistent.

        The sectors share ``u*K``, so ``u_charge*k_charge`` must equal
        ``u_spin*k_spin``.
        """
        for name, v in (("u_charge", u_charge), ("u_spin", u_spin),
                        ("k_charge", k_charge), ("k_spin", k_spin)):
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {v!r}")
        if abs(u_charge * k_charge - u_spin * k_spin) > rtol * u_charge * k_charge:
            raise ParameterError(
                "inconsistent sectors: u_charge*k_charge must equal u_spin*k_spin "
                f"({u_charge * k_charge!r} vs {u_spin * k_spin!r})"
            )
        r, gamma = invert_luttinger(k_charge, k_spin)
        return cls(
            gamma_up=gamma,
            gamma_down=gamma,
            u=u_charge / math.sqrt(1 + r),
            k_param=math.pi / math.sqrt(gamma),
            u_charge=u_charge,
            u_spin=u_spin,
            k_charge=k_charge,
            k_spin=k_spin,
            ratio_cross=r,
        )

    def with_velocity_unit(self, unit):
        """Velocities divided by `unit` (e.g. ``u_charge`` to normalize it to 1)."""
        return LuttingerParameters(
            gamma_up=self.gamma_up,
            gamma_down=self.gamma_down,
            u=self.u / unit,
            k_param=self.k_param,
            u_charge=self.u_charge / unit,
            u_spin=self.u_spin / unit,
            k_charge=self.k_charge,
            k_spin=self.k_spin,
            ratio_cross=self.ratio_cross,
        )

    def as_dict(self):
        return asdict(self)


@dataclass
class RegimeReport:
    """Outcome of a regime check.

    ``repulsive`` or ``separated`` is None when the check does not decide it.
    """

    repulsive: bool | None = None
    separated: bool | None = None
    messages: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    tolerance: float | None = None

    @property
    def ok(self):
        return self.repulsive is not False and self.separated is not False

    def as_dict(self):
        return asdict(self)


def derive_effective(cfg):
    """Effective masses, couplings and group velocities of the polaritons."""
    for name in _DETUNINGS:
        if getattr(cfg, name) == 0:
            raise ParameterError(f"{name} is zero; the effective parameters diverge")
    g2 = cfg.coupling_g ** 2
    nu = cfg.waveguide_velocity
    gamma_1d = 4 * math.pi * g2 / nu

    def species(omega, n_z, delta, delta_same, delta_other):
        v_s = nu * omega ** 2 / (math.pi * g2 * n_z)
        mass = -gamma_1d * n_z / (4 * delta * v_s)
        chi = gamma_1d * v_s / delta_same
        cross = gamma_1d * v_s / delta_other
        return v_s, mass, chi, cross

    v_up, m_up, chi_up, x_up = species(
        cfg.omega_up, cfg.atom_density_up, cfg.delta_up, cfg.delta_upup, cfg.delta_updown
    )
    v_dn, m_dn, chi_dn, x_dn = species(
        cfg.omega_down, cfg.atom_density_down, cfg.delta_down, cfg.delta_downdown, cfg.delta_downup
    )
    return EffectiveLiebLiniger(
        mass_up=m_up,
        mass_down=m_dn,
        chi_up=chi_up,
        chi_down=chi_dn,
        chi_cross=x_up + x_dn,
        cross_up=x_up,
        cross_down=x_dn,
        density_up=cfg.photon_density_up,
        density_down=cfg.photon_density_down,
        group_velocity_up=v_up,
        group_velocity_down=v_dn,
        gamma_1d_up=gamma_1d,
        gamma_1d_down=gamma_1d,
    )


def check_repulsive(cfg):
    """Sign conditions on the detunings for repulsive, same-sign species."""
    clauses = (
        ("delta_up*delta_upup < 0", cfg.delta_up * cfg.delta_upup < 0),
        ("delta_down*delta_downdown < 0", cfg.delta_down * cfg.delta_downdown < 0),
        ("delta_up*delta_down > 0", cfg.delta_up * cfg.delta_down > 0),
        ("delta_upup*delta_downdown > 0", cfg.delta_upup * cfg.delta_downdown > 0),
    )
    messages = [f"violated: {rule}" for rule, holds in clauses if not holds]
    return RegimeReport(repulsive=not messages, messages=messages)


def check_separation(eff, tol=DEFAULT_SEPARATION_TOL):
    """Relative mismatch of chi_s and rho_s/m_s between the two species."""
    if not tol > 0:
        raise ValueError("tol must be > 0")
    chi_res = abs(eff.chi_up - eff.chi_down) / abs(eff.chi_up) if eff.chi_up else math.inf
    ratio_up = eff.density_up / eff.mass_up
    ratio_dn = eff.density_down / eff.mass_down
    dm_res = abs(ratio_up - ratio_dn) / abs(ratio_up)
    residuals = {"chi": chi_res, "density_over_mass": dm_res}
    messages = [
        f"residual {name} = {val:.3g} exceeds {tol:g}"
        for name, val in residuals.items()
        if not val <= tol
    ]
    sign_rules = (
        ("m_up*chi_up > 0", eff.mass_up * eff.chi_up > 0),
        ("m_down*chi_down > 0", eff.mass_down * eff.chi_down > 0),
        ("m_up*m_down > 0", eff.mass_up * eff.mass_down > 0),
        ("chi_up*chi_down > 0", eff.chi_up * eff.chi_down > 0),
    )
    messages += [f"violated: {rule}" for rule, holds in sign_rules if not holds]
    return RegimeReport(
        repulsive=all(h for _, h in sign_rules),
        separated=all(v <= tol for v in residuals.values()),
        messages=messages,
        residuals=residuals,
        tolerance=tol,
    )


def derive_luttinger(eff, tol=DEFAULT_SEPARATION_TOL):
    """Charge and spin velocities and Luttinger parameters.

    Requires the separation conditions to hold within `tol`; chi and
    gamma are then taken from the up species.
    """
    report = check_separation(eff, tol)
    if not report.separated:
        raise RegimeError("species not separated: " + "; ".join(report.messages))
    gamma_up = eff.mass_up * eff.chi_up / eff.density_up
    gamma_dn = eff.mass_down * eff.chi_down / eff.density_down
    if not (gamma_up > 0 and gamma_dn > 0):
        raise RegimeError(f"gamma must be > 0 (repulsive regime), got {gamma_up!r}, {gamma_dn!r}")
    chi = eff.chi_up
    r = eff.chi_cross / chi
    if not abs(r) < 1:
        raise RegimeError(
            f"|chi_cross/chi| = {abs(r):.6g} >= 1: the spin sector has no real "
            "velocity (demixing instability)"
        )
    u = chi / math.sqrt(gamma_up)
    k = math.pi / math.sqrt(gamma_up)
    return LuttingerParameters(
        gamma_up=gamma_up,
        gamma_down=gamma_dn,
        u=u,
        k_param=k,
        u_charge=u * math.sqrt(1 + r),
        u_spin=u * math.sqrt(1 - r),
        k_charge=k / math.sqrt(1 + r),
        k_spin=k / math.sqrt(1 - r),
        ratio_cross=r,
    )


def invert_luttinger(k_charge, k_spin):
    """Cross ratio r and gamma reproducing the given sector Luttinger parameters."""
    if not (k_charge > 0 and k_spin > 0):
        raise ParameterError("k_charge and k_spin must be > 0")
    rho2 = (k_charge / k_spin) ** 2
    r = (1 - rho2) / (1 + rho2)
    k = k_charge * math.sqrt(1 + r)
    return r, (math.pi / k) ** 2


def sine_gordon_coefficient(eff):
    """Coefficient 2*chi_cross*rho0**2 of cos(sqrt(8) phi_spin) in the spin sector."""
    return 2 * eff.chi_cross * eff.total_density ** 2
