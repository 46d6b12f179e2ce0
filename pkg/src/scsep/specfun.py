"""
Special functions for the two-velocity density correlator.

Gamma, Gauss 2F1 and Appell F1 for real parameters and complex arguments,
in double precision.  F1 is summed as a double power series inside the
bi-disk ``|x|, |y| < 0.9`` and otherwise evaluated through its Euler
integral

    F1 = Gamma(c) / (Gamma(a) Gamma(c-a))
         * int_0^1 t^(a-1) (1-t)^(c-a-1) (1-xt)^(-b1) (1-yt)^(-b2) dt

with tanh-sinh quadrature, which copes with the algebraic singularities
at both endpoints.  Arguments lying on the real cut ``[1, inf)`` are moved
off it by ``+i*epsilon_branch`` (or ``-i*epsilon_branch``) and the
integration range is split at the branch point ``1/Re(z)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

SERIES_RADIUS = 0.9
MAX_SERIES_TERMS = 10_000
MAX_TS_LEVEL = 12

# tanh-sinh abscissae cover |s| <= _TS_SPAN; at s = 6 the nodes sit ~1e-275
# from the endpoints.
_TS_SPAN = 6
_MIN_TS_LEVEL = 3


class SpecialFunctionError(ArithmeticError):
    """Base class for failures in this module."""


class PoleError(SpecialFunctionError):
    """Raised when a function is evaluated at one of its poles."""


class ConvergenceError(SpecialFunctionError):
    """A series or quadrature did not reach the requested tolerance.

    Attributes
    ----------
    estimate : float
        Largest error estimate achieved.
    indices : list of int
        Flat indices of the failing points for vectorised calls.
    """

    def __init__(self, message, estimate=float("nan"), indices=()):
        super().__init__(message)
        self.estimate = estimate
        self.indices = list(indices)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the Euler-integral path and the branch-cut offset.

    ``retarded=True`` evaluates arguments on the cut at ``z + i*eps``;
    ``False`` selects ``z - i*eps``.  Both give the same modulus for real
    parameters.
    """

    abs_tol: float = 1e-14
    rel_tol: float = 1e-11
    max_levels: int = 10
    epsilon_branch: float = 1e-10
    retarded: bool = True

    def __post_init__(self):
        if not (self.abs_tol >= 1e-14 and self.rel_tol >= 1e-14):
            raise ValueError("abs_tol and rel_tol must be >= 1e-14")
        if not 0 < self.max_levels <= MAX_TS_LEVEL or int(self.max_levels) != self.max_levels:
            raise ValueError(f"max_levels must be an integer in [1, {MAX_TS_LEVEL}]")
        if not 1e-12 <= self.epsilon_branch <= 1e-3:
            raise ValueError("epsilon_branch must lie in [1e-12, 1e-3]")

    @property
    def branch_offset(self):
        return self.epsilon_branch if self.retarded else -self.epsilon_branch


DEFAULT_QUADRATURE = QuadratureSpec()


# ---------------------------------------------------------------------------
# Gamma function

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_fn(x):
    """Euler gamma function for real ``x``.

    Lanczos approximation (g = 7, 9 terms) for ``x >= 0.5`` and the
    reflection formula below that.  Raises `PoleError` at 0, -1, -2, ...
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"gamma_fn needs a finite argument, got {x}")
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x:g}")
    if x < 0.5:
        # sin(pi x) from the reduced argument keeps full relative accuracy
        n = round(x)
        sin_pix = math.sin(math.pi * (x - n))
        if n % 2:
            sin_pix = -sin_pix
        return math.pi / (sin_pix * gamma_fn(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (x + k)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def step_theta(x):
    """Heaviside step with the symmetric convention ``step_theta(0) = 0.5``."""
    if x > 0:
        return 1.0
    if x < 0:
        return 0.0
    return 0.5


# ---------------------------------------------------------------------------
# Gauss hypergeometric function

def _is_nonpositive_integer(v):
    return v <= 0 and v == math.floor(v)


def _on_cut(z):
    return z.imag == 0 and z.real >= 1


def _gauss_series(a, b, c, x, tol=1e-17):
    total = 1 + 0j
    term = 1 + 0j
    small = 0
    for n in range(MAX_SERIES_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        total += term
        if term == 0:
            return total
        if abs(term) <= tol * abs(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
    raise ConvergenceError(
        f"2F1 series did not converge in {MAX_SERIES_TERMS} terms at x={x}",
        estimate=abs(term) / max(abs(total), 1e-300),
    )


def hyp2f1(a, b, c, x, spec=None):
    """Gauss hypergeometric function ``2F1(a, b; c; x)`` for real parameters.

    Uses the Gauss series for ``|x| < 0.9``, the Pfaff transformation
    ``(1-x)^(-a) 2F1(a, c-b; c; x/(x-1))`` when that lands inside the same
    disk, and the Euler integral otherwise (needs ``c > b > 0`` or
    ``c > a > 0``).  Points on the cut ``[1, inf)`` get the branch offset of
    `spec`.
    """
    spec = spec or DEFAULT_QUADRATURE
    a, b, c = float(a), float(b), float(c)
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 has a pole at c={c:g}")
    x = complex(x)
    if x == 0 or a == 0 or b == 0:
        return 1 + 0j
    if _on_cut(x):
        x = complex(x.real, spec.branch_offset)
    if abs(x) < SERIES_RADIUS:
        return _gauss_series(a, b, c, x)
    w = x / (x - 1)
    if abs(w) < SERIES_RADIUS:
        return (1 - x) ** (-a) * _gauss_series(a, c - b, c, w)
    for p, e in ((a, b), (b, a)):
        if c > e > 0:
            val = _euler_integral(e, p, 0.0, c, np.array([x]), np.array([0j]), spec)
            return complex(val[0])
    raise ConvergenceError(
        f"2F1({a}, {b}; {c}; {x}): outside the series disks and no Euler "
        "representation with c > b > 0 or c > a > 0"
    )


# ---------------------------------------------------------------------------
# tanh-sinh node tables, built once at import and read-only afterwards

def _build_level(level):
    if level == 0:
        s = np.arange(-_TS_SPAN, _TS_SPAN + 1, dtype=float)
    else:
        h = 2.0 ** -level
        pos = h * np.arange(1, int(_TS_SPAN / h) + 1, 2)
        s = np.concatenate((-pos[::-1], pos))
    v = np.pi * np.sinh(s)
    # t = expit(v) on [0, 1]; 1 - t = expit(-v) without cancellation
    tau = 1.0 / (1.0 + np.exp(-v))
    tauc = 1.0 / (1.0 + np.exp(v))
    logw = np.log(np.pi * np.cosh(s)) - np.logaddexp(0.0, -v) - np.logaddexp(0.0, v)
    left = tau < 0.5
    for arr in (tau, tauc, logw, left):
        arr.setflags(write=False)
    return tau, tauc, logw, left


_TS_LEVELS = tuple(_build_level(k) for k in range(MAX_TS_LEVEL + 1))


def _breakpoints(x, y):
    """Interior branch points 1/Re(z) in (0, 1) for each point, sorted."""
    bx = np.where(x.real > 1, 1.0 / np.where(x.real > 1, x.real, 1.0), np.nan)
    by = np.where(y.real > 1, 1.0 / np.where(y.real > 1, y.real, 1.0), np.nan)
    lo = np.fmin(bx, by)
    hi = np.fmax(bx, by)
    hi = np.where(hi == lo, np.nan, hi)
    return lo, hi


def _piece_sum(factors, lo, hi, length, level):
    """Sum of w * f over the new nodes of `level` on pieces [lo, hi]."""
    tau, tauc, logw, left = _TS_LEVELS[level]
    dl = length[:, None] * tau
    dr = length[:, None] * tauc
    logmag = np.broadcast_to(logw, dl.shape) + np.log(length)[:, None]
    phase = None
    for alpha, beta, expo in factors:
        # evaluate alpha + beta*t relative to the nearer endpoint
        beta = beta[:, None]
        near_lo = (alpha + beta[:, 0] * lo)[:, None] + beta * dl
        near_hi = (alpha + beta[:, 0] * hi)[:, None] - beta * dr
        base = np.where(left, near_lo, near_hi)
        if np.iscomplexobj(base):
            logmag = logmag + expo * np.log(np.abs(base))
            arg = np.angle(base)
            phase = expo * arg if phase is None else phase + expo * arg
        else:
            logmag = logmag + expo * np.log(base)
    mag = np.exp(logmag)
    if phase is None:
        return mag.sum(axis=1).astype(complex), mag[:, [0, -1]].max(axis=1)
    vals = mag * np.exp(1j * phase)
    return vals.sum(axis=1), mag[:, [0, -1]].max(axis=1)


def _euler_integral(a, b1, b2, c, x, y, spec):
    """Vectorised Euler integral for F1 over 1-d arrays of (x, y).

    Each point converges independently, so its value does not depend on
    which other points share the call.
    """
    n = x.size
    norm = gamma_fn(c) / (gamma_fn(a) * gamma_fn(c - a))
    lo_bp, hi_bp = _breakpoints(x, y)
    nbp = np.isfinite(lo_bp).astype(int) + np.isfinite(hi_bp).astype(int)
    out = np.empty(n, dtype=complex)
    est = np.zeros(n)
    failed = []
    for k in range(3):
        idx = np.nonzero(nbp == k)[0]
        if idx.size == 0:
            continue
        edges = [np.zeros(idx.size)]
        if k >= 1:
            edges.append(lo_bp[idx])
        if k == 2:
            edges.append(hi_bp[idx])
        edges.append(np.ones(idx.size))
        vals, errs, bad = _integrate_group(a, b1, b2, c, x[idx], y[idx], edges, spec)
        out[idx] = norm * vals
        est[idx] = errs
        failed.extend(idx[bad].tolist())
    if failed:
        worst = float(est[failed].max())
        raise ConvergenceError(
            f"tanh-sinh quadrature for F1 did not converge at {len(failed)} point(s) "
            f"within {spec.max_levels} levels (error estimate {worst:.3g})",
            estimate=worst,
            indices=failed,
        )
    return out


def _integrate_group(a, b1, b2, c, x, y, edges, spec):
    m = x.size
    one = np.ones(m)
    # (alpha + beta t)^expo factors; alpha is scalar, beta per point
    factors = []
    if a != 1:
        factors.append((0.0, one, a - 1))
    if c - a != 1:
        factors.append((1.0, -one, c - a - 1))
    if b1 != 0:
        factors.append((1.0, -x if np.iscomplexobj(x) and np.any(x.imag) else -x.real, -b1))
    if b2 != 0:
        factors.append((1.0, -y if np.iscomplexobj(y) and np.any(y.imag) else -y.real, -b2))

    pieces = list(zip(edges[:-1], edges[1:]))
    total = np.zeros(m, dtype=complex)
    value = np.full(m, np.nan + 0j)
    err = np.full(m, np.inf)
    tail = np.zeros(m)
    active = np.arange(m)
    prev = None
    for level in range(spec.max_levels + 1):
        h = 2.0 ** -level
        part = np.zeros(active.size, dtype=complex)
        edge = np.zeros(active.size)
        for lo, hi in pieces:
            sub = [(al, be[active], ex) for al, be, ex in factors]
            s, e = _piece_sum(sub, lo[active], hi[active], hi[active] - lo[active], level)
            part += s
            edge = np.maximum(edge, e)
        total[active] += part
        cur = h * total[active]
        if level == 0:
            tail[active] = edge
        if prev is not None:
            diff = np.abs(cur - prev)
            tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(cur))
            err[active] = np.maximum(diff, tail[active])
            value[active] = cur
            done = (level >= _MIN_TS_LEVEL) & (err[active] <= tol) & np.isfinite(cur)
            active = active[~done]
            cur = cur[~done]
        else:
            value[active] = cur
        if active.size == 0:
            break
        prev = cur
    bad = np.zeros(m, dtype=bool)
    bad[active] = True
    return value, err, bad


# ---------------------------------------------------------------------------
# Appell F1

def _f1_series(a, b1, b2, c, x, y, tol=1e-16):
    """Double series summed along anti-diagonals m + n = k.

    F1 = sum_k (a)_k/(c)_k * sum_{m+n=k} (b1)_m x^m/m! (b2)_n y^n/n!,
    so each diagonal is one entry of a discrete convolution.
    """
    if x == 0 and y == 0:
        return 1 + 0j
    n = 64
    while True:
        k = np.arange(1, n)
        u = np.concatenate(([1 + 0j], np.cumprod((b1 + k - 1) / k * x)))
        v = np.concatenate(([1 + 0j], np.cumprod((b2 + k - 1) / k * y)))
        w = np.concatenate(([1.0], np.cumprod((a + k - 1) / (c + k - 1))))
        terms = w * np.convolve(u, v)[:n]
        total = terms.sum()
        tail = np.abs(terms[-(n // 4):]).max()
        if tail <= tol * abs(total) or tail == 0:
            return complex(total)
        if n >= MAX_SERIES_TERMS:
            raise ConvergenceError(
                f"F1 double series did not converge in {n} diagonals at x={x}, y={y}",
                estimate=tail / max(abs(total), 1e-300),
            )
        n = min(2 * n, MAX_SERIES_TERMS)


def appell_f1(a, b1, b2, c, x, y, spec=None, method="auto", full_output=False):
    """Appell hypergeometric function ``F1(a; b1, b2; c; x, y)``.

    Parameters
    ----------
    a, b1, b2, c : float
        Real parameters with ``c > a > 0``.
    x, y : complex or array_like
        Arguments; broadcast against each other.
    spec : QuadratureSpec, optional
        Quadrature tolerances and branch-cut offset.
    method : {'auto', 'series', 'integral'}
        'auto' sums the double series when ``|x|, |y| < 0.9`` and
        integrates otherwise.
    full_output : bool
        Also return a dict with the branch offsets applied to x and y and
        the method used per point.

    Returns
    -------
    complex or ndarray of complex
    """
    spec = spec or DEFAULT_QUADRATURE
    a, b1, b2, c = float(a), float(b1), float(b2), float(c)
    if not c > a > 0:
        raise ValueError(f"appell_f1 needs c > a > 0, got a={a}, c={c}")
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    xa, ya = np.broadcast_arrays(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))
    shape = xa.shape
    xa = xa.ravel().copy()
    ya = ya.ravel().copy()

    off = spec.branch_offset
    x_cut = (xa.imag == 0) & (xa.real >= 1)
    y_cut = (ya.imag == 0) & (ya.real >= 1)
    xa[x_cut] += 1j * off
    ya[y_cut] += 1j * off

    if method == "auto":
        use_series = (np.abs(xa) < SERIES_RADIUS) & (np.abs(ya) < SERIES_RADIUS)
    elif method == "series":
        if np.any(np.abs(xa) >= 1) or np.any(np.abs(ya) >= 1):
            raise ValueError("the double series needs |x| < 1 and |y| < 1")
        use_series = np.ones(xa.size, dtype=bool)
    elif method == "integral":
        use_series = np.zeros(xa.size, dtype=bool)
    else:
        raise ValueError(f"unknown method {method!r}")

    out = np.empty(xa.size, dtype=complex)
    for i in np.nonzero(use_series)[0]:
        out[i] = _f1_series(a, b1, b2, c, xa[i], ya[i])
    rest = np.nonzero(~use_series)[0]
    if rest.size:
        out[rest] = _euler_integral(a, b1, b2, c, xa[rest], ya[rest], spec)

    out = out.reshape(shape)
    if scalar:
        out = complex(out)
    if not full_output:
        return out
    info = {
        "x_offset": np.where(x_cut, off, 0.0).reshape(shape),
        "y_offset": np.where(y_cut, off, 0.0).reshape(shape),
        "method": np.where(use_series, "series", "integral").reshape(shape),
    }
    return out, info
