import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from homogenize import beltrami as lb
from homogenize.fields import Grid1D

PI = math.pi
FLAT = lb.SurfaceChart.graph("0")
SADDLE = lb.SurfaceChart.graph("X1*X2")
SURFACE = lb.wrinkled_surface_chart()
CURVE = lb.wrinkled_curve_metric()


# -- metrics ---------------------------------------------------------------------

def test_flat_metric():
    m = lb.metric_from_chart(FLAT, [0.3, 0.4])
    np.testing.assert_allclose(m.g, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(m.coefficient, np.eye(2), atol=1e-12)


def test_saddle_metric():
    m = lb.metric_from_chart(SADDLE, [1.0, 1.0])
    np.testing.assert_allclose(m.g, [[2, 1], [1, 2]], atol=1e-6)
    assert m.det == pytest.approx(3.0, abs=1e-6)
    np.testing.assert_allclose(m.coefficient, np.array([[2, -1], [-1, 2]]) / math.sqrt(3), atol=1e-6)


def test_curve_metric():
    m = lb.metric_from_chart(lb.SurfaceChart.curve("X1", "sin(pi*X1)"), [0.0])
    assert m.g[0, 0] == pytest.approx(1 + PI ** 2, rel=1e-9)
    assert m.coefficient[0, 0] == pytest.approx((1 + PI ** 2) ** -0.5, rel=1e-9)


def test_degenerate_metric():
    with pytest.raises(lb.DegenerateMetricError):
        lb.metric_from_chart(lb.SurfaceChart.curve("0", "1"), [0.2])
    parallel = lb.SurfaceChart((lb.Expression("X1 + X2"), lb.Expression("X1 + X2"), lb.Expression("0")), 2)
    with pytest.raises(lb.DegenerateMetricError):
        lb.metric_from_chart(parallel, [0.2, 0.1])


def test_two_scale_chart_needs_eta():
    with pytest.raises(ValueError):
        lb.metric_from_chart(SURFACE, [0.1, 0.2])


def test_builtin_curve_metric_matches_chart():
    chart_metric = lb.TwoScaleMetric.from_chart(lb.wrinkled_curve_chart(), 0.05)
    x, y = np.meshgrid(np.linspace(0, 1, 7), np.linspace(0, 1, 9))
    np.testing.assert_allclose(chart_metric(x, y), CURVE(x, y), rtol=1e-8)


def test_lb_coefficient_values():
    assert lb.lb_coefficient_1d(CURVE, 0.5, 0.25) == pytest.approx(1.0, abs=1e-14)
    assert lb.lb_coefficient_1d(CURVE, 0.0, 0.0) == pytest.approx((1 + 9 * PI ** 2) ** -0.5, rel=1e-14)
    flat = lb.TwoScaleMetric(lambda x, y: np.ones_like(x + y))
    assert lb.lb_coefficient_1d(flat, 0.3, 0.1) == 1.0
    with pytest.raises(lb.DegenerateMetricError):
        lb.lb_coefficient_1d(lb.TwoScaleMetric(lambda x, y: x - 1.0), 0.5, 0.0)


def test_curve_metric_is_periodic():
    assert CURVE.validate_periodicity().passed
    assert not lb.TwoScaleMetric(lambda x, y: 1 + y * y).validate_periodicity().passed


# -- pointwise 1D homogenization -----------------------------------------------------

def test_slow_only_metric():
    g = lb.TwoScaleMetric(lambda x, y: (1 + x) ** 2 + 0 * y)
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(lb.homogenize_pointwise_1d(g, x), 1 / (1 + x), rtol=1e-13)


def test_midpoint_value():
    k = lb.homogenize_pointwise_1d(CURVE, np.array([0.5]))[0]
    assert abs(k - oracles.curve_khat_midpoint()) <= 1e-8


def test_pointwise_against_quad_and_symmetric():
    grid = Grid1D(0, 1, 41)
    k = lb.homogenize_pointwise_1d(CURVE, grid)
    for x, v in zip(grid.nodes[::8], k[::8]):
        assert v == pytest.approx(oracles.curve_khat(x), rel=1e-9)
    np.testing.assert_allclose(k, k[::-1], rtol=1e-12)
    y = np.linspace(0, 1, 4001)
    for x, v in zip(grid.nodes, k):
        kappa = lb.lb_coefficient_1d(CURVE, np.full_like(y, x), y)
        assert kappa.min() - 1e-12 <= v <= kappa.max() + 1e-12


def test_flat_curve_solutions():
    flat = lb.TwoScaleMetric(lambda x, y: np.ones(np.broadcast(x, y).shape))
    for mode in ("exact", "homogenized"):
        u = lb.solve_lb_1d(flat, 0.05, 10.0, mode)
        np.testing.assert_allclose(u.values, 10 * u.coords[0], atol=1e-12)
    with pytest.raises(ValueError):
        lb.solve_lb_1d(flat, 0.05, 10.0, "other")


def test_curve_convergence():
    errs = []
    for eta in (0.5, 0.05, 0.005):
        a = lb.solve_lb_1d(CURVE, eta, 10.0, "exact")
        b = lb.solve_lb_1d(CURVE, eta, 10.0, "homogenized")
        errs.append(np.abs(a.values - b.values).max())
    assert errs[0] >= errs[1] >= errs[2]


# -- 2D pointwise cell problems ------------------------------------------------------

def test_flat_surface_tensor():
    for t in lb.homogenize_lb_2d(FLAT, [(0.1, 0.2), (0.7, 0.4)], 16):
        np.testing.assert_allclose(t.matrix, np.eye(2), atol=1e-10)


def test_cylinder_wrinkle():
    # f = eta sin(2 pi X1 / eta): A = diag(g11^-1/2, g11^1/2), a laminate in Y1
    chart = lb.SurfaceChart.graph("ETA*sin(2*pi*Y1)")
    m = 1 / oracles.curve_khat_midpoint()  # mean of sqrt(1 + 4 pi^2 cos^2)
    t = lb.homogenize_lb_2d(chart, [(0.3, 0.6)], 64, 0.1)[0]
    assert t.k11 < 1
    assert t.k11 == pytest.approx(1 / m, rel=1e-6)
    assert t.k22 == pytest.approx(m, rel=1e-6)
    assert abs(t.k12) <= 1e-12 and abs(t.k21) <= 1e-12
    assert t.k11 * t.k22 == pytest.approx(1.0, rel=1e-12)


def _voigt_reuss(chart, point, n, eta):
    p = lb.lb_cell_problem(chart, point, n, eta)
    a = np.stack([np.stack([p.a11, p.a12], -1), np.stack([p.a12, p.a22], -1)], -2)
    upper = a.mean(axis=(0, 1))
    lower = np.linalg.inv(np.linalg.inv(a).mean(axis=(0, 1)))
    return lower, upper


@pytest.mark.parametrize("point", [(0.0, 0.0), (0.5, 0.25), (0.9, 0.8)])
def test_surface_tensor_bounds(point):
    t = lb.homogenize_lb_2d(SURFACE, [point], 32, 0.25)[0]
    assert abs(t.k12 - t.k21) <= 1e-8 * np.abs(t.matrix).max()
    assert np.all(t.eigenvalues() > 0)
    lower, upper = _voigt_reuss(SURFACE, point, 32, 0.25)
    assert np.linalg.eigvalsh(upper - t.matrix).min() >= -1e-8
    assert np.linalg.eigvalsh(t.matrix - lower).min() >= -1e-8


def test_threads_and_cache():
    pts = [(0.1, 0.1), (0.3, 0.7), (0.8, 0.2), (0.5, 0.5)]
    serial = lb.homogenize_lb_2d(SURFACE, pts, 16, 0.25)
    cache = lb.CellCache()
    threaded = lb.homogenize_lb_2d(SURFACE, pts, 16, 0.25, threads=3, cache=cache)
    assert serial == threaded
    assert len(cache) == len(pts)
    again = lb.homogenize_lb_2d(SURFACE, pts, 16, 0.25, cache=cache)
    assert all(a is b for a, b in zip(again, threaded))


def test_lb_2d_rejects_curves():
    with pytest.raises(ValueError):
        lb.homogenize_lb_2d(lb.wrinkled_curve_chart(), [(0.0, 0.0)], 16, 0.1)


# -- geometric identities --------------------------------------------------------------

def test_dual_basis_examples():
    rep = lb.dual_basis_check(FLAT, [0.2, 0.3])
    assert rep.passed
    t = FLAT.tangents([0.2, 0.3])
    m = lb.metric_from_tangents(t)
    np.testing.assert_allclose(np.einsum("ik,ka->ia", m.inv, t), t, atol=1e-12)
    assert lb.dual_basis_check(SADDLE, [1.0, 1.0]).passed
    assert lb.dual_basis_check(lb.SurfaceChart.curve("X1", "sin(pi*X1)"), [0.3]).passed


unit = st.floats(0.0, 1.0)


@settings(max_examples=50)
@given(unit, unit)
def test_dual_basis_random_points(a, b):
    assert lb.dual_basis_check(SURFACE, [a, b], 0.25).passed


@settings(max_examples=50)
@given(unit, unit)
def test_metric_identity(a, b):
    m = lb.metric_from_chart(SURFACE, [a, b], 0.25)
    lhs = math.sqrt(m.g[0, 0]) / math.sqrt(m.inv[1, 1])
    assert lhs == pytest.approx(math.sqrt(m.det), rel=1e-10)
    lhs = math.sqrt(m.g[1, 1]) / math.sqrt(m.inv[0, 0])
    assert lhs == pytest.approx(math.sqrt(m.det), rel=1e-10)
    assert np.all(np.linalg.eigvalsh(m.coefficient) > 0)


def test_flat_divergence():
    rep = lb.divergence_consistency_check(FLAT, "X1^2", [0.3, 0.4])
    assert rep.reference == pytest.approx(2.0, abs=1e-6)
    np.testing.assert_allclose(rep.estimates, 2.0, atol=1e-6)
    rep = lb.divergence_consistency_check(FLAT, "X1^2 - X2^2", [0.3, 0.4])
    assert abs(rep.reference) <= 1e-6
    np.testing.assert_allclose(rep.estimates, 0.0, atol=1e-6)


@pytest.mark.parametrize("field", ["X1^2", "sin(X1)*cos(X2)", "exp(0.5*X1)*X2"])
def test_saddle_divergence_second_order(field):
    rep = lb.divergence_consistency_check(SADDLE, field, [1.0, 1.0], (0.1, 0.05, 0.025))
    assert np.all(np.diff(rep.errors) < 0)
    assert rep.order == pytest.approx(2.0, abs=0.3)


def test_isometry_invariance():
    # shifting the graph by a constant is an isometry; finite differences see it only
    # through rounding of the shifted values
    shifted = lb.SurfaceChart.graph("X1*X2 + ETA*sin(2*pi*Y1)*sin(2*pi*Y2) + 3")
    for point in [(0.1, 0.2), (0.6, 0.9)]:
        a = lb.metric_from_chart(SURFACE, point, 0.25)
        b = lb.metric_from_chart(shifted, point, 0.25)
        np.testing.assert_allclose(b.g, a.g, rtol=1e-9)
        np.testing.assert_allclose(b.coefficient, a.coefficient, rtol=1e-9, atol=1e-12)
    t0 = lb.homogenize_lb_2d(SURFACE, [(0.3, 0.3)], 16, 0.25)[0]
    t1 = lb.homogenize_lb_2d(shifted, [(0.3, 0.3)], 16, 0.25)[0]
    np.testing.assert_allclose(t1.matrix, t0.matrix, rtol=1e-9, atol=1e-12)
