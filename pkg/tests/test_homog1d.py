import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from homogenize import homog1d, quadrature
from homogenize.fields import EllipticityError, Grid1D, ScalarCoefficient
from homogenize.homog1d import BVP1D

SINE = ScalarCoefficient("1 + 0.5*sin(2*pi*Y1)")


def two_phase(Y1=0.0, **_):
    y = np.mod(Y1, 1.0)
    return np.where(y < 0.5, 1.0, 2.0)


TWO_PHASE = ScalarCoefficient(two_phase)


# -- quadrature -----------------------------------------------------------------

def test_gauss_legendre_polynomial_exactness():
    # five points integrate degree 9 exactly on every panel
    assert quadrature.integrate(lambda x: x ** 9, 0.0, 1.0, 1) == pytest.approx(0.1, rel=1e-14)


def test_cumulative_matches_antiderivative():
    nodes = np.linspace(0, 2, 21)
    np.testing.assert_allclose(quadrature.cumulative(np.exp, nodes, 4), np.expm1(nodes), rtol=1e-13)


def test_checked_integration_refines():
    val, panels = quadrature.integrate_checked(lambda x: np.sin(50 * x) ** 2, 0.0, 1.0, 2)
    assert panels > 2
    assert val == pytest.approx(0.5 - math.sin(100) / 200, rel=1e-10)


# -- solves ---------------------------------------------------------------------

def test_constant_solution():
    u = homog1d.solve_bvp_1d(BVP1D(ScalarCoefficient("1"), 0.1))
    np.testing.assert_allclose(u.values, u.coords[0], atol=1e-14)
    assert len(u.coords[0]) == homog1d.OUTPUT_NODES


def test_linear_conductivity_log_solution():
    u = homog1d.solve_bvp_1d(BVP1D(ScalarCoefficient("1 + X1"), 0.5))
    np.testing.assert_allclose(u.values, np.log1p(u.coords[0]), atol=1e-13)
    assert u.values[-1] == pytest.approx(0.6931472, abs=1e-7)


def test_bar_solution_against_quad():
    eta = 0.05
    u = homog1d.solve_bvp_1d(BVP1D(ScalarCoefficient("1 + 0.5*sin(X1/ETA)"), eta), grid=Grid1D(0, 1, 11))
    for x, v in zip(u.coords[0], u.values):
        assert v == pytest.approx(oracles.exact_1d(lambda s: 1 + 0.5 * math.sin(s / eta), x), abs=1e-11)


def test_under_resolved_quadrature_rejected():
    with pytest.raises(quadrature.QuadratureError):
        homog1d.solve_bvp_1d(BVP1D(SINE, 0.01), n_quad=100)


def test_flux_constancy():
    # kappa * dU/dX == h at every node, with dU/dX from the quadrature identity h / kappa
    eta, h = 0.05, 3.0
    c = ScalarCoefficient("1 + 0.5*sin(X1/ETA)")
    u = homog1d.solve_bvp_1d(BVP1D(c, eta, 0.0, h), grid=Grid1D(0, 1, 401))
    x = u.coords[0]
    k = c.evaluate(X1=x, ETA=eta)
    mid = 0.5 * (x[1:] + x[:-1])
    slope = np.diff(u.values) / np.diff(x)
    k_mid = c.evaluate(X1=mid, ETA=eta)
    # central slope differs from h/kappa(mid) only by O(dx^2)
    np.testing.assert_allclose(k_mid * slope, h, rtol=2e-3)
    assert np.all(k > 0)


def test_homogenized_solutions():
    u = homog1d.solve_homogenized_1d(1.0, 0.0, 1.0)
    np.testing.assert_allclose(u.values, u.coords[0])
    u = homog1d.solve_homogenized_1d(0.8660254, 0.0, 1.0)
    assert u.values[-1] == pytest.approx(1.1547005, abs=1e-7)
    u = homog1d.solve_homogenized_1d(lambda x: 1.0 + x, 0.0, 1.0)
    assert u.values[-1] == pytest.approx(math.log(2), abs=1e-13)
    with pytest.raises(EllipticityError):
        homog1d.solve_homogenized_1d(0.0, 0.0, 1.0)


# -- cell quantities ---------------------------------------------------------------

def test_harmonic_mean_constant():
    assert homog1d.harmonic_mean(ScalarCoefficient("2.5")) == pytest.approx(2.5, rel=1e-15)


def test_harmonic_mean_sine():
    k = homog1d.harmonic_mean(SINE)
    assert k == pytest.approx(oracles.SQRT_075, abs=1e-12)
    assert k == pytest.approx(oracles.quad_harmonic_mean(lambda y: 1 + 0.5 * math.sin(2 * math.pi * y)), abs=1e-11)


def test_two_phase():
    assert homog1d.harmonic_mean(TWO_PHASE) == pytest.approx(4 / 3, rel=1e-14)
    chi = homog1d.corrector_1d(TWO_PHASE, Grid1D(0, 1, 101, "Y1"))
    y = chi.grid.nodes
    khat = 4 / 3
    expected = np.where(y <= 0.5, (khat - 1) * y, (khat - 1) * 0.5 + (khat / 2 - 1) * (y - 0.5))
    np.testing.assert_allclose(chi.values, expected, atol=1e-13)
    assert homog1d.flux_form_mean(TWO_PHASE, chi) == pytest.approx(4 / 3, rel=1e-13)


def test_corrector_constant_is_zero():
    chi = homog1d.corrector_1d(ScalarCoefficient("3"), Grid1D(0, 1, 11, "Y1"))
    np.testing.assert_allclose(chi.values, 0.0, atol=1e-14)


def test_corrector_sine():
    chi = homog1d.corrector_1d(SINE, Grid1D(0, 1, 201, "Y1"))
    assert chi.values[0] == 0.0 and chi.values[-1] == 0.0
    assert np.abs(chi.values).max() > 0.01
    assert homog1d.flux_form_mean(SINE, chi) == pytest.approx(oracles.SQRT_075, abs=1e-12)


def test_flux_form_rejects_foreign_corrector():
    chi = homog1d.corrector_1d(SINE, Grid1D(0, 1, 21, "Y1"))
    with pytest.raises(ValueError):
        homog1d.flux_form_mean(ScalarCoefficient("2"), chi)


def test_cell_length_invariance():
    one = homog1d.harmonic_mean(SINE, length=1.0)
    two = homog1d.harmonic_mean(SINE, length=2.0)
    assert abs(one - two) <= 1e-10


def test_bar_convergence_is_monotone():
    c = ScalarCoefficient("1 + 0.5*sin(Y1)")
    khat = homog1d.harmonic_mean(c, length=2 * math.pi)
    errs = []
    for eta in (0.5, 0.05, 0.005):
        exact = homog1d.solve_bvp_1d(BVP1D(c, eta, period=2 * math.pi))
        hom = homog1d.solve_homogenized_1d(khat, 0.0, 1.0)
        errs.append(np.abs(exact.values - hom.values).max())
    assert errs[0] >= errs[1] >= errs[2]


coefficient_params = st.tuples(
    st.floats(1.0, 3.0), st.floats(-0.45, 0.45), st.floats(-0.45, 0.45),
    st.floats(0.0, 2 * math.pi), st.integers(1, 4),
)


def random_coefficient(p):
    a, b, c, phase, k = p
    return ScalarCoefficient(f"{a!r}*(1 + {b!r}*sin(2*pi*Y1 + {phase!r}) + {c!r}*cos({2 * k}*pi*Y1))")


@settings(max_examples=30)
@given(coefficient_params)
def test_harmonic_equals_flux_form(p):
    c = random_coefficient(p)
    chi = homog1d.corrector_1d(c, Grid1D(0, 1, 65, "Y1"))
    assert abs(chi.khat - homog1d.flux_form_mean(c, chi)) <= 1e-10 * chi.khat


@settings(max_examples=30)
@given(coefficient_params)
def test_mean_bounds_and_length_invariance(p):
    c = random_coefficient(p)
    y = np.linspace(0, 1, 2001)
    vals = c.evaluate(Y1=y)
    khat = homog1d.harmonic_mean(c)
    assert vals.min() - 1e-12 <= khat <= vals.max() + 1e-12
    assert khat <= homog1d.arithmetic_mean(c) + 1e-12
    assert abs(khat - homog1d.harmonic_mean(c, length=2.0)) <= 1e-10 * khat
