import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scsep.specfun import (
    ConvergenceError,
    PoleError,
    QuadratureSpec,
    appell_f1,
    gamma_fn,
    hyp2f1,
    step_theta,
)

from oracles import f1_oracle, gamma_oracle, hyp2f1_oracle

# parameters of the spectral function at Kc = 0.55, Ks = 1.1
A, B1, B2, C = 0.275, 0.325, 0.175, 0.825

# frozen from tests/oracles.py (mpmath at 40 digits / graded Gauss-Legendre)
GAMMA_REF = {0.175: 5.286842414362294, -2.5: -0.9453087204829419, 7.3: 1271.4236336639087}
HYP2F1_REF = {-3.0: 0.8436530735787487, 0.6: 1.0818258713261446}
F1_REF = {
    (-3.0, 0.5): 0.870839537596206,
    (0.3, -0.7): 1.0031581579594615,
    (-3.0, -40.0): 0.641812856375032,
    (0.5, 0.5): 1.1171301517283394,
    (-3.0, 2.5): 0.8754374018762473 + 0.14461940787928437j,
}


@pytest.mark.parametrize("x", sorted(GAMMA_REF))
def test_gamma_frozen(x):
    assert gamma_fn(x) == pytest.approx(GAMMA_REF[x], rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        gamma_fn(x)


def test_gamma_integers_and_half():
    for n in range(1, 15):
        assert gamma_fn(n) == pytest.approx(math.factorial(n - 1), rel=1e-13)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-20, max_value=40).filter(lambda v: abs(v - round(v)) > 1e-6))
def test_gamma_recurrence(x):
    assert gamma_fn(x + 1) == pytest.approx(x * gamma_fn(x), rel=1e-11)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=-15, max_value=30).filter(lambda v: abs(v - round(v)) > 1e-4))
def test_gamma_matches_mpmath(x):
    assert gamma_fn(x) == pytest.approx(gamma_oracle(x), rel=1e-12)


def test_step_theta():
    assert step_theta(2.0) == 1.0
    assert step_theta(-1e-300) == 0.0
    assert step_theta(0.0) == 0.5


@pytest.mark.parametrize("x", sorted(HYP2F1_REF))
def test_hyp2f1_frozen(x):
    assert hyp2f1(0.5, 0.3, 1.5, x) == pytest.approx(HYP2F1_REF[x], rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.05, 2.0), st.floats(0.05, 2.0), st.floats(0.1, 3.0), st.floats(-50.0, 0.95)
)
def test_hyp2f1_matches_mpmath(a, b, dc, x):
    c = max(a, b) + dc
    assert abs(hyp2f1(a, b, c, x) - hyp2f1_oracle(a, b, c, x)) <= 1e-11 * abs(hyp2f1_oracle(a, b, c, x))


def test_hyp2f1_on_cut_takes_upper_side():
    ref = complex(mpmath.hyp2f1(A, B1 + B2, C, mpmath.mpc(3.0, 1e-30)))
    assert abs(hyp2f1(A, B1 + B2, C, 3.0) - ref) < 1e-9


def test_hyp2f1_without_representation_raises():
    with pytest.raises(ConvergenceError):
        hyp2f1(-0.5, -0.7, 0.2, -20.0)


def test_f1_origin_exact():
    assert appell_f1(A, B1, B2, C, 0.0, 0.0) == 1.0
    assert appell_f1(0.9, -3.0, 2.5, 1.7, 0.0, 0.0) == 1.0


@pytest.mark.parametrize("xy", sorted(F1_REF, key=str))
def test_f1_frozen(xy):
    v = appell_f1(A, B1, B2, C, *xy)
    assert abs(v - F1_REF[xy]) <= 1e-10 * abs(F1_REF[xy])


@pytest.mark.parametrize("x", [-30.0, -3.0, -0.5, 0.4, 0.95, 2.5])
def test_f1_y_zero_reduces_to_2f1(x):
    ref = complex(mpmath.hyp2f1(A, B1, C, mpmath.mpc(x, 1e-30)))
    assert abs(appell_f1(A, B1, B2, C, x, 0.0) - ref) <= 1e-9 * abs(ref)


@pytest.mark.parametrize("x", [-30.0, -3.0, -0.5, 0.4, 0.95, 3.0])
def test_f1_equal_arguments_reduce_to_2f1(x):
    ref = complex(mpmath.hyp2f1(A, B1 + B2, C, mpmath.mpc(x, 1e-30)))
    assert abs(appell_f1(A, B1, B2, C, x, x) - ref) <= 1e-9 * abs(ref)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.85, 0.85), st.floats(-0.85, 0.85))
def test_f1_series_and_integral_agree(x, y):
    s = appell_f1(A, B1, B2, C, x, y, method="series")
    i = appell_f1(A, B1, B2, C, x, y, method="integral")
    assert abs(s - i) <= 1e-8 * abs(s)


@settings(max_examples=15, deadline=None)
@given(st.floats(-40.0, 0.9), st.floats(-40.0, 0.9))
def test_f1_matches_oracle_off_cut(x, y):
    ref = f1_oracle(A, B1, B2, C, x, y)
    assert abs(appell_f1(A, B1, B2, C, x, y) - ref) <= 1e-10 * abs(ref)


def test_f1_lower_side_is_conjugate():
    up = appell_f1(A, B1, B2, C, -3.0, 2.5)
    down = appell_f1(A, B1, B2, C, -3.0, 2.5, spec=QuadratureSpec(retarded=False))
    assert abs(down - up.conjugate()) < 1e-13
    assert abs(f1_oracle(A, B1, B2, C, -3.0, 2.5, side=-1) - down) < 1e-10


def test_f1_vectorised_matches_scalar():
    xs = np.array([-3.0, 0.2, -10.0])
    ys = np.array([[0.5], [2.5]])
    out = appell_f1(A, B1, B2, C, xs, ys)
    assert out.shape == (2, 3)
    for j in range(2):
        for i in range(3):
            assert out[j, i] == appell_f1(A, B1, B2, C, xs[i], ys[j, 0])


def test_f1_full_output_reports_offsets():
    spec = QuadratureSpec(epsilon_branch=1e-8)
    _, info = appell_f1(A, B1, B2, C, np.array([-3.0, 0.1]), np.array([2.5, 0.2]),
                        spec=spec, full_output=True)
    assert info["y_offset"].tolist() == [1e-8, 0.0]
    assert info["x_offset"].tolist() == [0.0, 0.0]
    assert info["method"].tolist() == ["integral", "series"]


def test_f1_parameter_checks():
    with pytest.raises(ValueError):
        appell_f1(0.9, B1, B2, 0.8, 0.1, 0.1)
    with pytest.raises(ValueError):
        appell_f1(A, B1, B2, C, 1.5, 0.1, method="series")
    with pytest.raises(ValueError):
        appell_f1(A, B1, B2, C, 0.1, 0.1, method="bogus")


@pytest.mark.parametrize(
    "kw",
    [{"abs_tol": 1e-16}, {"rel_tol": 0.0}, {"max_levels": 0}, {"max_levels": 13},
     {"epsilon_branch": 1e-2}, {"epsilon_branch": 1e-13}],
)
def test_quadrature_spec_validation(kw):
    with pytest.raises(ValueError):
        QuadratureSpec(**kw)


def test_tight_budget_reports_convergence_failure():
    spec = QuadratureSpec(max_levels=1)
    with pytest.raises(ConvergenceError) as err:
        appell_f1(A, B1, B2, C, np.array([-3.0, -3.0]), np.array([2.5, 0.999]), spec=spec)
    assert err.value.indices
