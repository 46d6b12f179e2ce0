"""Independent reference evaluations used to produce the frozen test values.

Nothing here calls into ``scsep``.  The F1 oracle is Gauss-Legendre
quadrature of the Euler integral on panels graded geometrically towards
every singular point, with the exact +i0 phase across branch points
instead of a finite offset.  Gamma and 2F1 come from mpmath at 40 digits.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.special import roots_legendre

_GL_CACHE = {}


def _gl(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = roots_legendre(order)
    return _GL_CACHE[order]


def gamma_oracle(x, dps=40):
    with mpmath.workdps(dps):
        return float(mpmath.gamma(mpmath.mpf(x)))


def hyp2f1_oracle(a, b, c, x, dps=40):
    with mpmath.workdps(dps):
        return complex(mpmath.hyp2f1(a, b, c, x))


def _graded_half(f, e, sign, length, p, order, ratio, floor):
    """int over [e, e + sign*length] of f(e, offset), with f ~ |offset|^p at e.

    Panels shrink geometrically towards e; the last sliver of width
    ``floor*length`` is integrated with the leading power law.
    """
    x, w = _gl(order)
    total = 0j
    d_hi = length
    while d_hi > floor * length:
        d_lo = d_hi * ratio
        half = 0.5 * (d_hi - d_lo)
        d = d_lo + half * (x + 1)
        total += half * np.sum(w * f(e, sign * d))
        d_hi = d_lo
    g = f(e, np.array([sign * 0.5 * d_hi]))[0] / (0.5 * d_hi) ** p
    return total + g * d_hi ** (p + 1) / (p + 1)


def f1_oracle(a, b1, b2, c, x, y, order=60, ratio=0.3, floor=1e-22, side=+1):
    """Appell F1 for real parameters and real x, y.

    Branch points inside [0, 1] are crossed with the phase of
    ``z + side*i0``.  Each linear factor is evaluated from the exact
    offset to the singular point the node is attached to.
    """
    norm = math.gamma(c) / (math.gamma(a) * math.gamma(c - a))
    # factor = |slope*(t - root)|^expo, times exp(i*pi*cut*side) where negative
    factors = [(0.0, 1.0, a - 1, 0.0), (1.0, -1.0, c - a - 1, 0.0)]
    # (1 - x t)^(-b) is 1 to double precision once |x| < 1e-200
    if abs(x) > 1e-200:
        factors.append((1 / x, -x, -b1, b1))
    if abs(y) > 1e-200:
        factors.append((1 / y, -y, -b2, b2))

    def f(e, offset):
        t = e + offset
        val = np.ones(np.shape(offset), dtype=complex)
        for root, slope, expo, cut in factors:
            lin = slope * offset if root == e else slope * (t - root)
            val = val * np.abs(lin) ** expo
            if cut:
                val = val * np.where(lin < 0, np.exp(1j * math.pi * cut * side), 1.0)
        return val

    points = {0.0: a - 1, 1.0: c - a - 1}
    for root, _, expo, _ in factors[2:]:
        if 0 < root < 1:
            points[root] = expo
    edges = sorted(points)
    total = 0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        total += _graded_half(f, lo, +1, half, min(points[lo], 0.0), order, ratio, floor)
        total += _graded_half(f, hi, -1, half, min(points[hi], 0.0), order, ratio, floor)
    return norm * total


def spectrum_oracle(omega, q, k_charge, k_spin, u_charge, u_spin, rho0=1.0, alpha=1.0):
    """D(omega, q) in units of rho0^2 alpha; prefactor in 40-digit arithmetic."""
    s = 0.5 * (k_charge + k_spin)
    with mpmath.workdps(40):
        pref = -4 * mpmath.pi * mpmath.mpf(rho0) ** 2 * (mpmath.mpf(alpha) / 2) ** (k_charge + k_spin)
        pref *= mpmath.gamma(1 - s) / mpmath.gamma(s)
        d = mpmath.mpf(omega) ** 2 - mpmath.mpf(u_spin) ** 2 * mpmath.mpf(q) ** 2
        pref *= abs(d) ** (s - 1) * mpmath.mpf(u_spin) ** (1 - k_charge - k_spin)
        if d > 0:
            pref *= mpmath.exp(-1j * mpmath.pi * (s - 1))
        pref /= mpmath.mpf(rho0) ** 2 * alpha
        x = float(1 - mpmath.mpf(u_charge) ** 2 / mpmath.mpf(u_spin) ** 2)
        y = float((mpmath.mpf(u_charge) ** 2 - mpmath.mpf(u_spin) ** 2) * mpmath.mpf(q) ** 2 / d)
        pref = complex(pref)
    return pref * f1_oracle(0.5 * k_charge, s - 0.5, 1 - s, s, x, y)
