"""
Density-density spectral function of the 2k_F density component.

For separated spin and charge sectors the Fourier transform of the
time-ordered correlator of ``2 rho0 cos(2k_F z - sqrt2 phi_c) cos(sqrt2 phi_s)``
has the closed form

    D(w, q) = P |w^2 - us^2 q^2|^(S-1) us^(1-2S) exp[-i pi (S-1) Theta(w^2 - us^2 q^2)]
              * F1(Kc/2, S - 1/2, 1 - S, S; 1 - uc^2/us^2, 1 - (w^2 - uc^2 q^2)/(w^2 - us^2 q^2))

with ``S = (Kc + Ks)/2`` and ``P = -4 pi rho0^2 (alpha/2)^(2S) Gamma(1-S)/Gamma(S)``.
Values are reported in units of ``rho0^2 alpha``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .params import LuttingerParameters
from .specfun import DEFAULT_QUADRATURE, ConvergenceError, QuadratureSpec, appell_f1, gamma_fn

SINGULAR_TOL = 1e-9
MIN_SAMPLES_AROUND_CHARGE = 50
MERGE_STEPS = 3
_CHUNK = 2048


class SingularLineError(ValueError):
    """The requested point lies on ``w = u_spin q`` or ``w = u_charge q``."""


class SpectrumGridError(RuntimeError):
    """One or more grid points failed; ``failures`` lists (iq, iw, message)."""

    def __init__(self, failures):
        self.failures = failures
        head = "; ".join(f"(q[{j}], omega[{i}]): {msg}" for j, i, msg in failures[:5])
        more = f" (+{len(failures) - 5} more)" if len(failures) > 5 else ""
        super().__init__(f"{len(failures)} grid point(s) failed: {head}{more}")


class PeakError(RuntimeError):
    """Fewer than two peaks resolved along the requested cut."""


@dataclass(frozen=True)
class SpectrumRequest:
    """Luttinger parameters plus the (omega, q) lattice to evaluate.

    ``rho0`` is the total density and ``alpha`` the short-distance cutoff.
    """

    lutt: LuttingerParameters
    rho0: float = 1.0
    alpha: float = 1.0
    omega_min: float = 0.05
    omega_max: float = 3.0
    omega_steps: int = 300
    q_min: float = 0.1
    q_max: float = 3.0
    q_steps: int = 300
    quad: QuadratureSpec = DEFAULT_QUADRATURE

    def __post_init__(self):
        if not (self.rho0 > 0 and self.alpha > 0):
            raise ValueError("rho0 and alpha must be > 0")
        for name in ("omega_steps", "q_steps"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.omega_min < 0:
            raise ValueError("omega_min must be >= 0")
        if self.omega_steps > 1 and not self.omega_max > self.omega_min:
            raise ValueError("omega_max must exceed omega_min")
        if self.q_steps > 1 and not self.q_max > self.q_min:
            raise ValueError("q_max must exceed q_min")
        if self.omega_steps == 1 and self.omega_max != self.omega_min:
            raise ValueError("a single omega sample needs omega_min == omega_max")
        if self.q_steps == 1 and self.q_max != self.q_min:
            raise ValueError("a single q sample needs q_min == q_max")
        if np.any(self.qs == 0):
            raise ValueError("the q axis must not contain 0")
        if self.omega_steps > 1:
            limit = 0.02 * self.lutt.u_charge * max(abs(self.q_min), abs(self.q_max))
            if self.omega_step > limit:
                raise ValueError(
                    f"omega step {self.omega_step:.4g} exceeds 0.02*u_charge*q_max = {limit:.4g}"
                )

    @property
    def omegas(self):
        return np.linspace(self.omega_min, self.omega_max, self.omega_steps)

    @property
    def qs(self):
        return np.linspace(self.q_min, self.q_max, self.q_steps)

    @property
    def omega_step(self):
        if self.omega_steps == 1:
            return 0.0
        return (self.omega_max - self.omega_min) / (self.omega_steps - 1)

    def column(self, q):
        """Same omega axis, single q."""
        return SpectrumRequest(
            lutt=self.lutt, rho0=self.rho0, alpha=self.alpha,
            omega_min=self.omega_min, omega_max=self.omega_max, omega_steps=self.omega_steps,
            q_min=q, q_max=q, q_steps=1, quad=self.quad,
        )

    def as_dict(self):
        d = asdict(self)
        d["lutt"] = self.lutt.as_dict()
        d["quad"] = asdict(self.quad)
        return d


@dataclass
class SpectrumGrid:
    """``values[j, i] = D(omegas[i], qs[j])`` in units of rho0^2 alpha (q-major)."""

    omegas: np.ndarray
    qs: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (len(self.qs), len(self.omegas)):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"(len(qs), len(omegas)) = {(len(self.qs), len(self.omegas))}"
            )

    @property
    def magnitude(self):
        return np.abs(self.values)


@dataclass
class PeakSet:
    q: float
    peak_omegas: np.ndarray
    peak_heights: np.ndarray
    inferred_u_spin: float
    inferred_u_charge: float


def _f1_parameters(lutt):
    kc, ks = lutt.k_charge, lutt.k_spin
    s = 0.5 * (kc + ks)
    return 0.5 * kc, s - 0.5, 1.0 - s, s


def _prefactor(req):
    lutt = req.lutt
    kc, ks = lutt.k_charge, lutt.k_spin
    s = 0.5 * (kc + ks)
    pref = -4 * math.pi * req.rho0 ** 2 * (req.alpha / 2) ** (kc + ks)
    pref *= gamma_fn(1 - s) / gamma_fn(s)
    pref *= lutt.u_spin ** (1 - kc - ks)
    return pref / (req.rho0 ** 2 * req.alpha)


def _evaluate(omegas, qs, req):
    """D at paired 1-d arrays (omegas, qs); each entry computed independently."""
    lutt = req.lutt
    us2 = lutt.u_spin ** 2
    uc2 = lutt.u_charge ** 2
    w2 = omegas * omegas
    q2 = qs * qs
    d_spin = w2 - us2 * q2
    s = 0.5 * (lutt.k_charge + lutt.k_spin)
    x = (us2 - uc2) / us2
    y = (uc2 - us2) * q2 / d_spin
    a, b1, b2, c = _f1_parameters(lutt)
    f1 = appell_f1(a, b1, b2, c, np.full(y.shape, x), y, spec=req.quad)
    theta = np.where(d_spin > 0, 1.0, 0.0)
    phase = np.exp(-1j * math.pi * (s - 1) * theta)
    return _prefactor(req) * np.abs(d_spin) ** (s - 1) * phase * f1


def _check_off_lines(omega, q, lutt, rtol=1e-13):
    w = abs(omega)
    for name, u in (("spin", lutt.u_spin), ("charge", lutt.u_charge)):
        uq = abs(u * q)
        if abs(w - uq) <= rtol * max(w, uq):
            raise SingularLineError(
                f"(omega={omega!r}, q={q!r}) lies on the {name} line omega = u_{name} q"
            )


def density_spectrum_point(omega, q, req):
    """Complex D(omega, q) in units of rho0^2 alpha."""
    _check_off_lines(omega, q, req.lutt)
    return complex(_evaluate(np.array([float(omega)]), np.array([float(q)]), req)[0])


def _worker_count(workers):
    if workers is not None:
        return max(1, int(workers))
    n = os.cpu_count() or 1
    cap = os.environ.get("SC_SEP_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def density_spectrum_grid(req, workers=None):
    """Evaluate D over the request's (omega, q) lattice.

    Lattice points within 1e-9 of a singular line are evaluated half an
    omega step higher; their indices are listed in ``metadata['nudged']``.
    Points are independent, so the result does not depend on `workers`.
    """
    omegas, qs = req.omegas, req.qs
    ww, qq = np.meshgrid(omegas, qs)
    ww = ww.ravel().copy()
    qq = qq.ravel()
    lutt = req.lutt
    near = np.zeros(ww.shape, dtype=bool)
    for u in (lutt.u_spin, lutt.u_charge):
        near |= np.abs(np.abs(ww) - np.abs(u * qq)) <= SINGULAR_TOL
    step = req.omega_step or 1e-6 * max(1.0, abs(req.omega_min))
    ww[near] += 0.5 * step

    chunks = [slice(k, min(k + _CHUNK, ww.size)) for k in range(0, ww.size, _CHUNK)]
    values = np.empty(ww.size, dtype=complex)
    failures = []

    def run(sl):
        try:
            values[sl] = _evaluate(ww[sl], qq[sl], req)
            return []
        except ConvergenceError as exc:
            # retry pointwise to locate the failures
            out = []
            for k in range(sl.start, sl.stop):
                try:
                    values[k] = _evaluate(ww[k:k + 1], qq[k:k + 1], req)[0]
                except ConvergenceError as e:
                    out.append((k, str(e)))
            return out or [(sl.start, str(exc))]

    n_workers = _worker_count(workers)
    if n_workers == 1 or len(chunks) == 1:
        results = [run(sl) for sl in chunks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run, chunks))
    for res in results:
        failures.extend(res)
    if failures:
        n_w = len(omegas)
        raise SpectrumGridError([(k // n_w, k % n_w, msg) for k, msg in sorted(failures)])

    nudged = [[int(k // len(omegas)), int(k % len(omegas))] for k in np.nonzero(near)[0]]
    meta = {
        "request": req.as_dict(),
        "branch_offset": req.quad.branch_offset,
        "nudged": nudged,
        "nudge": 0.5 * step,
        "units": "rho0^2 alpha",
    }
    return SpectrumGrid(omegas=omegas, qs=qs, values=values.reshape(len(qs), len(omegas)), metadata=meta)


def local_maxima(values, merge_steps=MERGE_STEPS):
    """Indices of interior local maxima, merging any closer than `merge_steps`."""
    v = np.asarray(values, dtype=float)
    idx = [i for i in range(1, len(v) - 1) if v[i] > v[i - 1] and v[i] >= v[i + 1]]
    merged = []
    for i in idx:
        if merged and i - merged[-1] < merge_steps:
            if v[i] > v[merged[-1]]:
                merged[-1] = i
        else:
            merged.append(i)
    return merged


def extract_peaks(grid, q):
    """The two strongest maxima of |D| along omega at the column nearest `q`."""
    j = int(np.argmin(np.abs(np.asarray(grid.qs) - q)))
    q_col = float(grid.qs[j])
    omegas = np.asarray(grid.omegas)
    request = grid.metadata.get("request")
    if request is not None:
        uc_q = request["lutt"]["u_charge"] * abs(q_col)
        below = int(np.sum(omegas < uc_q))
        above = int(np.sum(omegas > uc_q))
        if below < MIN_SAMPLES_AROUND_CHARGE or above < MIN_SAMPLES_AROUND_CHARGE:
            raise ValueError(
                f"need >= {MIN_SAMPLES_AROUND_CHARGE} omega samples on each side of "
                f"u_charge*q = {uc_q:.4g}; have {below} below and {above} above"
            )
    mag = np.abs(grid.values[j])
    peaks = local_maxima(mag)
    if len(peaks) < 2:
        raise PeakError(f"found {len(peaks)} peak(s) at q={q_col:g}; need two")
    top = sorted(sorted(peaks, key=lambda i: mag[i], reverse=True)[:2])
    w = omegas[top]
    return PeakSet(
        q=q_col,
        peak_omegas=w,
        peak_heights=mag[top],
        inferred_u_spin=float(w[0] / abs(q_col)),
        inferred_u_charge=float(w[1] / abs(q_col)),
    )


def fit_slopes(qs, spin_omegas, charge_omegas):
    """Least-squares slopes through the origin of both peak branches."""
    q = np.asarray(qs, dtype=float)
    qq = np.dot(q, q)
    return (float(np.dot(q, spin_omegas) / qq), float(np.dot(q, charge_omegas) / qq))


def velocities_from_sweep(req, q_list, workers=None):
    """Fit u_spin and u_charge from peak positions at several q.

    Each q is evaluated on the request's omega axis.
    """
    q_list = [float(q) for q in q_list]
    if len(q_list) < 3:
        raise ValueError("velocities_from_sweep needs at least 3 q values")
    spin, charge = [], []
    for q in q_list:
        peaks = extract_peaks(density_spectrum_grid(req.column(q), workers=workers), q)
        spin.append(peaks.peak_omegas[0])
        charge.append(peaks.peak_omegas[1])
    return fit_slopes(q_list, spin, charge)
