import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from scsep.bosonize import (
    PhaseFields,
    SectorFields,
    from_sectors,
    reconstruct_densities,
    single_species_density,
    to_sectors,
)

N = 256
DZ = 0.05
Z = np.arange(N) * DZ
SQRT2 = math.sqrt(2)


def fields(pu, pd, tu=None, td=None):
    zero = np.zeros(N)
    return PhaseFields(pu, pd, zero if tu is None else tu, zero if td is None else td, DZ)


def sectors(pc, ps):
    zero = np.zeros(N)
    return SectorFields(pc + zero, ps + zero, zero, zero, DZ)


def test_symmetric_input_is_pure_charge():
    f = np.sin(Z)
    s = to_sectors(fields(f, f, 2 * f, 2 * f))
    np.testing.assert_allclose(s.phi_charge, SQRT2 * f, rtol=1e-15)
    np.testing.assert_array_equal(s.phi_spin, 0.0)
    np.testing.assert_allclose(s.theta_charge, 2 * SQRT2 * f, rtol=1e-15)


def test_antisymmetric_input_is_pure_spin():
    f = np.cos(3 * Z)
    s = to_sectors(fields(f, -f))
    np.testing.assert_allclose(s.phi_spin, SQRT2 * f, rtol=1e-15)
    np.testing.assert_array_equal(s.phi_charge, 0.0)


def test_from_sectors_mirrors():
    f = np.sin(Z)
    p = from_sectors(SectorFields(SQRT2 * f, np.zeros(N), np.zeros(N), np.zeros(N), DZ))
    np.testing.assert_allclose(p.phi_up, f, rtol=1e-15)
    np.testing.assert_allclose(p.phi_down, f, rtol=1e-15)
    p = from_sectors(SectorFields(np.zeros(N), SQRT2 * f, np.zeros(N), np.zeros(N), DZ))
    np.testing.assert_allclose(p.phi_up, f, rtol=1e-15)
    np.testing.assert_allclose(p.phi_down, -f, rtol=1e-15)


def test_length_mismatch():
    with pytest.raises(ValueError, match="mismatched"):
        PhaseFields(np.zeros(3), np.zeros(4), np.zeros(3), np.zeros(3), 0.1)
    with pytest.raises(ValueError, match="mismatched"):
        SectorFields(np.zeros(3), np.zeros(3), np.zeros(2), np.zeros(3), 0.1)


finite = st.floats(-1e3, 1e3)


@settings(max_examples=100, deadline=None)
@given(arrays(float, (4, 32), elements=finite))
def test_round_trip_and_isometry(a):
    f = PhaseFields(a[0], a[1], a[2], a[3], 0.1)
    back = from_sectors(to_sectors(f))
    for name in ("phi_up", "phi_down", "theta_up", "theta_down"):
        np.testing.assert_allclose(getattr(back, name), getattr(f, name), rtol=1e-14, atol=1e-14 * 1e3)
    s = to_sectors(f)
    before = np.sum(a[0] ** 2 + a[1] ** 2) * f.dz
    after = np.sum(s.phi_charge ** 2 + s.phi_spin ** 2) * f.dz
    assert after == pytest.approx(before, rel=1e-12, abs=1e-12)


def test_zero_fields_m1():
    rho0 = 0.8
    rc, rs = reconstruct_densities(sectors(0.0, 0.0), rho0, 1)
    # k_F = pi rho0 / 2
    np.testing.assert_allclose(rc, rho0 * (1 + 2 * np.cos(math.pi * rho0 * Z)), atol=1e-14)
    np.testing.assert_array_equal(rs, 0.0)


def test_zero_fields_m0():
    rc, rs = reconstruct_densities(sectors(0.0, 0.0), 0.8, 0)
    np.testing.assert_array_equal(rc, 0.8)
    np.testing.assert_array_equal(rs, 0.0)


def test_quarter_spin_phase():
    rho0 = 1.3
    rc, rs = reconstruct_densities(sectors(0.0, math.pi / (2 * SQRT2)), rho0, 1)
    np.testing.assert_allclose(rc, rho0, atol=1e-14)
    np.testing.assert_allclose(rs, 2 * rho0 * np.sin(math.pi * rho0 * Z), atol=1e-14)


def test_gradient_term_sign_and_periodic_differences():
    # phi_c = A sin(k z) on a periodic grid
    k = 2 * math.pi * 3 / (N * DZ)
    amp = 0.2
    rc, rs = reconstruct_densities(sectors(amp * np.sin(k * Z), 0.0), 1.0, 0)
    centred = amp * np.sin(k * DZ) / DZ * np.cos(k * Z)
    np.testing.assert_allclose(rc, 1.0 - SQRT2 / math.pi * centred, atol=1e-13)


def test_reconstruct_errors():
    with pytest.raises(ValueError, match="m_max"):
        reconstruct_densities(sectors(0.0, 0.0), 1.0, 2)
    with pytest.raises(ValueError, match="rho0"):
        reconstruct_densities(sectors(0.0, 0.0), 0.0, 1)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (2, N), elements=st.floats(-3, 3)), arrays(float, (2, N), elements=st.floats(-3, 3)),
       st.floats(-2, 2))
def test_m0_is_linear(a, b, c):
    ra = reconstruct_densities(SectorFields(a[0], a[1], a[0], a[1], DZ), 1.0, 0)
    rb = reconstruct_densities(SectorFields(b[0], b[1], b[0], b[1], DZ), 1.0, 0)
    mix = a + c * b
    rm = reconstruct_densities(SectorFields(mix[0], mix[1], mix[0], mix[1], DZ), 1.0, 0)
    zero = reconstruct_densities(sectors(0.0, 0.0), 1.0, 0)
    for i in range(2):
        # affine map: subtract the constant background first
        lhs = rm[i] - zero[i]
        rhs = (ra[i] - zero[i]) + c * (rb[i] - zero[i])
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_spin_density_averages_out_for_constant_fields(pc, ps):
    rho0 = 0.5
    # three full periods of cos(2 k_F z), each of length 2/rho0 = 4
    n = int(round(12.0 / DZ))
    zero = np.zeros(n)
    s = SectorFields(pc + zero, ps + zero, zero, zero, DZ)
    _, rs = reconstruct_densities(s, rho0, 1)
    assert abs(np.sum(rs) * DZ) < 1e-12


def test_single_species_linear_phase_m0():
    sigma = 0.3
    rho = single_species_density(sigma * Z, 0.7, 0, DZ)
    np.testing.assert_allclose(rho, 0.7 + sigma / math.pi, rtol=1e-13)


def test_single_species_zero_phase_m1():
    rho = single_species_density(np.zeros(N), 0.7, 1, DZ)
    np.testing.assert_allclose(rho, 0.7 * (1 + 2 * np.cos(2 * math.pi * 0.7 * Z)), atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 6), st.floats(-0.5, 0.5), st.floats(-3, 3))
def test_single_species_average(m_max, sigma, offset):
    # phi = sigma z + const shifts the density by sigma/pi; oscillations
    # average out over whole periods of the shifted wavenumber
    rho0 = 0.5
    k = 2 * math.pi * rho0 + 2 * sigma
    periods = 4
    n = 400
    length = periods * 2 * math.pi / k
    dz = length / n
    z = np.arange(n) * dz
    rho = single_species_density(sigma * z + offset, rho0, m_max, dz)
    assert np.mean(rho) == pytest.approx(rho0 + sigma / math.pi, rel=1e-10, abs=1e-12)


def test_single_species_rejects_negative_order():
    with pytest.raises(ValueError):
        single_species_density(np.zeros(4), 1.0, -1, 0.1)
