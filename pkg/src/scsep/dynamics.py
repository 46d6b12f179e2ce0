"""
Mean-field dynamics of the two polariton species.

Each species obeys

    i d/dt psi_s = -(1/2 m_s) d^2/dz^2 psi_s + (chi_s |psi_s|^2 + x_s |psi_sbar|^2) psi_s

on a periodic box, integrated with Strang splitting (half kinetic step in
Fourier space, full nonlinear phase, half kinetic step).  ``x_s`` is the
per-equation cross coefficient ``cross_up``/``cross_down`` of
`EffectiveLiebLiniger`, not the summed Hamiltonian ``chi_cross``.

This is the classical-field limit.  It is quantitative only at weak
coupling (gamma below ~0.1); the strongly interacting regime is described
by the Luttinger formulas in `scsep.spectral` instead.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

NONLINEAR_PHASE_BOUND = 0.05
TRANSIENT_FRACTION = 0.2
MIN_FRONT_FRAMES = 10


class StabilityError(ValueError):
    """The nonlinear phase per step exceeds the allowed bound."""


class NoFrontError(RuntimeError):
    """No propagating front could be tracked in a density trace."""


@dataclass
class FieldState:
    psi_up: np.ndarray
    psi_down: np.ndarray
    box_length: float
    time: float = 0.0

    def __post_init__(self):
        n = len(self.psi_up)
        if len(self.psi_down) != n:
            raise ValueError("psi_up and psi_down must have the same length")
        if n < 2 or n & (n - 1):
            raise ValueError(f"grid_points must be a power of two, got {n}")
        if not self.box_length > 0:
            raise ValueError("box_length must be > 0")

    @property
    def grid_points(self):
        return len(self.psi_up)

    @property
    def dz(self):
        return self.box_length / self.grid_points

    @property
    def z(self):
        return np.arange(self.grid_points) * self.dz

    @property
    def densities(self):
        return np.abs(self.psi_up) ** 2, np.abs(self.psi_down) ** 2

    @property
    def norms(self):
        up, down = self.densities
        return float(np.sum(up) * self.dz), float(np.sum(down) * self.dz)


@dataclass(frozen=True)
class Perturbation:
    """Gaussian density bump ``amplitude*exp(-((z - center)/width)**2)``.

    'charge' adds it to both species, 'spin' adds it to up and removes it
    from down.
    """

    kind: str = "none"
    amplitude: float = 0.0
    width: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if self.kind not in ("charge", "spin", "none"):
            raise ValueError(f"perturbation kind must be charge, spin or none, got {self.kind!r}")
        if not self.width > 0:
            raise ValueError("perturbation width must be > 0")


@dataclass(frozen=True)
class EvolutionSpec:
    dt: float
    steps: int
    eff: object
    record_every: int = 1

    def __post_init__(self):
        if self.dt == 0 or not math.isfinite(self.dt):
            raise ValueError("dt must be finite and nonzero")
        if self.steps < 1 or self.record_every < 1:
            raise ValueError("steps and record_every must be >= 1")


@dataclass
class DensityTrace:
    """Charge and spin densities recorded over time (frames x grid)."""

    times: np.ndarray
    z: np.ndarray
    rho_charge: np.ndarray
    rho_spin: np.ndarray
    norms: np.ndarray

    @property
    def norm_drift(self):
        """Largest relative change of either species' norm over the run."""
        return float(np.max(np.abs(self.norms / self.norms[0] - 1)))


def init_state(rho0_up, rho0_down, perturbation=None, grid_points=4096, box_length=1024.0):
    """Uniform condensates with an optional Gaussian charge or spin bump."""
    pert = perturbation or Perturbation()
    if isinstance(pert, dict):
        pert = Perturbation(**pert)
    if not (rho0_up > 0 and rho0_down > 0):
        raise ValueError("background densities must be > 0")
    if grid_points < 2 or grid_points & (grid_points - 1):
        raise ValueError(f"grid_points must be a power of two, got {grid_points}")
    z = np.arange(grid_points) * (box_length / grid_points)
    bump = np.zeros(grid_points)
    if pert.kind != "none":
        if not 0 <= pert.center < box_length:
            raise ValueError(f"bump center {pert.center} lies outside [0, {box_length})")
        if pert.width >= box_length / 4:
            raise ValueError(f"bump width {pert.width} is not small against box_length/4")
        if 40 * pert.width > box_length:
            warnings.warn("box_length < 40*width: fronts may wrap during a run", stacklevel=2)
        if abs(pert.amplitude) > 0.1 * min(rho0_up, rho0_down):
            warnings.warn("bump amplitude above 10% of the background density", stacklevel=2)
        # nearest periodic image of the center
        dist = (z - pert.center + 0.5 * box_length) % box_length - 0.5 * box_length
        bump = pert.amplitude * np.exp(-((dist / pert.width) ** 2))
    sign_down = -1.0 if pert.kind == "spin" else 1.0
    n_up = rho0_up + bump
    n_down = rho0_down + sign_down * bump
    if np.any(n_up < 0) or np.any(n_down < 0):
        raise ValueError("perturbation drives a density negative")
    return FieldState(
        psi_up=np.sqrt(n_up).astype(complex),
        psi_down=np.sqrt(n_down).astype(complex),
        box_length=float(box_length),
    )


class _Stepper:
    def __init__(self, grid_points, box_length, spec):
        eff = spec.eff
        k = 2 * np.pi * np.fft.fftfreq(grid_points, d=box_length / grid_points)
        half = 0.5 * spec.dt
        self.kin_up = np.exp(-1j * half * k ** 2 / (2 * eff.mass_up))
        self.kin_down = np.exp(-1j * half * k ** 2 / (2 * eff.mass_down))
        self.dt = spec.dt
        self.eff = eff
        self.rate = max(abs(eff.chi_up) + abs(eff.cross_up), abs(eff.chi_down) + abs(eff.cross_down))

    def check(self, up, down):
        peak = max(np.max(np.abs(up)) ** 2, np.max(np.abs(down)) ** 2)
        phase = abs(self.dt) * self.rate * peak
        if phase > NONLINEAR_PHASE_BOUND:
            raise StabilityError(
                f"nonlinear phase per step {phase:.3g} exceeds {NONLINEAR_PHASE_BOUND}; reduce dt"
            )

    def __call__(self, up, down):
        eff = self.eff
        up = np.fft.ifft(self.kin_up * np.fft.fft(up))
        down = np.fft.ifft(self.kin_down * np.fft.fft(down))
        n_up = up.real ** 2 + up.imag ** 2
        n_down = down.real ** 2 + down.imag ** 2
        up = up * np.exp(-1j * self.dt * (eff.chi_up * n_up + eff.cross_up * n_down))
        down = down * np.exp(-1j * self.dt * (eff.chi_down * n_down + eff.cross_down * n_up))
        up = np.fft.ifft(self.kin_up * np.fft.fft(up))
        down = np.fft.ifft(self.kin_down * np.fft.fft(down))
        return up, down


def step(state, spec):
    """Advance `state` by one Strang step of ``spec.dt`` (which may be negative)."""
    stepper = _Stepper(state.grid_points, state.box_length, spec)
    stepper.check(state.psi_up, state.psi_down)
    up, down = stepper(state.psi_up, state.psi_down)
    return replace(state, psi_up=up, psi_down=down, time=state.time + spec.dt)


def evolve(state, spec):
    """Run ``spec.steps`` steps, recording densities every ``record_every`` steps.

    The initial state is always the first frame.
    """
    stepper = _Stepper(state.grid_points, state.box_length, spec)
    up, down = state.psi_up, state.psi_down
    stepper.check(up, down)
    dz = state.dz
    times, charge, spin, norms = [], [], [], []

    def record(t):
        n_up = np.abs(up) ** 2
        n_down = np.abs(down) ** 2
        times.append(t)
        charge.append(n_up + n_down)
        spin.append(n_up - n_down)
        norms.append((np.sum(n_up) * dz, np.sum(n_down) * dz))

    record(state.time)
    for i in range(1, spec.steps + 1):
        up, down = stepper(up, down)
        if i % spec.record_every == 0:
            stepper.check(up, down)
            record(state.time + i * spec.dt)
    return DensityTrace(
        times=np.array(times),
        z=state.z,
        rho_charge=np.array(charge),
        rho_spin=np.array(spin),
        norms=np.array(norms),
    )


def final_state(state, spec):
    """State after ``spec.steps`` steps, without recording."""
    stepper = _Stepper(state.grid_points, state.box_length, spec)
    stepper.check(state.psi_up, state.psi_down)
    up, down = state.psi_up, state.psi_down
    for _ in range(spec.steps):
        up, down = stepper(up, down)
    return replace(state, psi_up=up, psi_down=down, time=state.time + spec.steps * spec.dt)


def front_position(z, delta):
    """Rightmost point where |delta| crosses half its maximum, linearly interpolated."""
    mag = np.abs(delta)
    half = 0.5 * mag.max()
    i = int(np.nonzero(mag >= half)[0].max())
    if i + 1 >= len(z):
        return float(z[i])
    # mag[i] >= half > mag[i+1]
    frac = (mag[i] - half) / (mag[i] - mag[i + 1])
    return float(z[i] + frac * (z[i + 1] - z[i]))


def front_velocity(trace, channel):
    """Speed of the right-moving front of the charge or spin perturbation.

    The first 20% of the frames are discarded as transient.  The front is
    the rightmost half-maximum crossing of the deviation from the spatial
    median in each frame; its position is fitted linearly in time.
    """
    if channel not in ("charge", "spin"):
        raise ValueError(f"channel must be 'charge' or 'spin', got {channel!r}")
    rho = trace.rho_charge if channel == "charge" else trace.rho_spin
    start = int(math.ceil(TRANSIENT_FRACTION * len(trace.times)))
    if len(trace.times) - start < MIN_FRONT_FRAMES:
        raise ValueError(
            f"need >= {MIN_FRONT_FRAMES} frames after the transient, have {len(trace.times) - start}"
        )
    scale = max(float(np.max(np.abs(trace.rho_charge))), 1e-300)
    times, positions = [], []
    for t, frame in zip(trace.times[start:], rho[start:]):
        delta = frame - np.median(frame)
        if np.max(np.abs(delta)) <= 1e-9 * scale:
            raise NoFrontError(f"no {channel} front above the noise floor at t={t:g}")
        times.append(t)
        positions.append(front_position(trace.z, delta))
    slope, _ = np.polyfit(np.array(times), np.array(positions), 1)
    return float(slope)


def bogoliubov_velocities(eff):
    """Long-wavelength sound speeds (charge-like, spin-like) of the mean-field equations.

    Eigenvalues of the linearised hydrodynamic matrix
    ``[[rho_up chi_up/m_up, rho_up x_up/m_up], [rho_down x_down/m_down, rho_down chi_down/m_down]]``;
    for identical species these are ``sqrt(rho_s (chi +- x)/m)``.
    """
    m = np.array([
        [eff.density_up * eff.chi_up / eff.mass_up, eff.density_up * eff.cross_up / eff.mass_up],
        [eff.density_down * eff.cross_down / eff.mass_down, eff.density_down * eff.chi_down / eff.mass_down],
    ])
    ev = np.sort(np.linalg.eigvals(m).real)[::-1]
    if np.any(ev <= 0):
        raise ValueError("mean-field mixture is unstable: a sound speed is imaginary")
    return float(math.sqrt(ev[0])), float(math.sqrt(ev[1]))
