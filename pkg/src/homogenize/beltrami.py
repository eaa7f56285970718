"""Laplace-Beltrami coefficients on parameterised curves and graph surfaces.

In chart coordinates the steady surface heat equation with unit conductivity
and no source is ``d/dX_i (sqrt|g| g^-1_ij dU/dX_j) = 0``, i.e. an elliptic
problem with coefficient ``A = sqrt|g| g^-1`` (``g^-1/2`` on a curve).  When
the chart oscillates on a scale ``eta`` this coefficient is homogenized like
any other, with one cell problem per macroscopic point.

Charts may be written two-scale, in slow variables X1, X2 and fast variables
Y1, Y2 (unit period).  Derivatives then follow the two-scale rule
``d/dX_i = partial/partial X_i + (1/eta) partial/partial Y_i``; evaluating at
``Y = X/eta`` gives the metric of the physical surface, while holding X fixed
and varying Y gives the cell coefficient at X.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import homog1d
from .cell2d import CellProblem2D, HomogenizedTensor, homogenize_cell
from .expr import Expression
from .fields import (Grid1D, PeriodicGrid2D, PeriodicityReport, ScalarCoefficient,
                     validate_periodicity)
from .homog1d import BVP1D, SolutionField

log = logging.getLogger(__name__)

FD_STEP = 1e-6
DET_FLOOR = 1e-12


class DegenerateMetricError(ValueError):
    pass


def _expr(source) -> Expression:
    return source if isinstance(source, Expression) else Expression(source)


@dataclass(frozen=True)
class SurfaceChart:
    """Parameterisation ``x(X)`` of a curve (dim 1) or surface (dim 2)."""

    components: tuple
    dim: int
    fd_step: float = FD_STEP

    @classmethod
    def curve(cls, x1, x2, fd_step: float = FD_STEP) -> "SurfaceChart":
        return cls((_expr(x1), _expr(x2)), 1, fd_step)

    @classmethod
    def graph(cls, f, fd_step: float = FD_STEP) -> "SurfaceChart":
        """Graph surface ``(X1, X2, f(X1, X2))``."""
        return cls((Expression("X1"), Expression("X2"), _expr(f)), 2, fd_step)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset().union(*(c.variables for c in self.components))

    @property
    def two_scale(self) -> bool:
        return bool(self.variables & {"Y1", "Y2"})

    def _bindings(self, x, y, eta) -> dict:
        b = {}
        for i in range(self.dim):
            b[f"X{i + 1}"] = x[i]
            if y is not None:
                b[f"Y{i + 1}"] = y[i]
        if eta is not None:
            b["ETA"] = eta
        return b

    def evaluate(self, x: Sequence, y: Sequence | None = None, eta: float | None = None) -> list:
        x, y = self._resolve(x, y, eta)
        b = self._bindings(x, y, eta)
        shape = np.broadcast_shapes(*(np.shape(v) for v in x))
        return [np.broadcast_to(np.asarray(c(**b), dtype=float), shape) for c in self.components]

    def _resolve(self, x, y, eta):
        x = [np.asarray(v, dtype=float) for v in x]
        if self.two_scale:
            if eta is None:
                raise ValueError("a two-scale chart needs eta")
            if y is None:
                y = [v / eta for v in x]
            else:
                y = [np.asarray(v, dtype=float) for v in y]
        else:
            y = None
        return x, y

    def tangents(self, x: Sequence, y: Sequence | None = None, eta: float | None = None) -> np.ndarray:
        """Tangent vectors ``dx/dX_i`` by central differences; shape ``(..., dim, ambient)``."""
        x, y = self._resolve(x, y, eta)
        s = self.fd_step
        shape = np.broadcast_shapes(*(np.shape(v) for v in x), *(np.shape(v) for v in (y or [])))
        out = np.zeros(shape + (self.dim, len(self.components)))
        for i in range(self.dim):
            xp = [v + s if k == i else v for k, v in enumerate(x)]
            xm = [v - s if k == i else v for k, v in enumerate(x)]
            bp, bm = self._bindings(xp, y, eta), self._bindings(xm, y, eta)
            for a, c in enumerate(self.components):
                out[..., i, a] = (np.asarray(c(**bp)) - np.asarray(c(**bm))) / (2 * s)
            if y is not None:
                yp = [v + s if k == i else v for k, v in enumerate(y)]
                ym = [v - s if k == i else v for k, v in enumerate(y)]
                bp, bm = self._bindings(x, yp, eta), self._bindings(x, ym, eta)
                for a, c in enumerate(self.components):
                    out[..., i, a] += (np.asarray(c(**bp)) - np.asarray(c(**bm))) / (2 * s * eta)
        return out


@dataclass(frozen=True)
class MetricEval:
    """Metric data at one or more points; matrices have trailing shape (dim, dim)."""

    g: np.ndarray
    det: np.ndarray
    inv: np.ndarray
    coefficient: np.ndarray  # sqrt|g| g^-1


def metric_from_tangents(t: np.ndarray) -> MetricEval:
    g = np.einsum("...ia,...ja->...ij", t, t)
    dim = g.shape[-1]
    if dim == 1:
        det = g[..., 0, 0]
        if np.any(~(det > DET_FLOOR)):
            raise DegenerateMetricError("curve metric is degenerate")
        inv = 1.0 / g
    else:
        g11, g12, g22 = g[..., 0, 0], 0.5 * (g[..., 0, 1] + g[..., 1, 0]), g[..., 1, 1]
        det = g11 * g22 - g12 * g12
        if np.any(~(det > DET_FLOOR)):
            raise DegenerateMetricError("tangent vectors are (nearly) parallel")
        inv = np.empty_like(g)
        inv[..., 0, 0] = g22 / det
        inv[..., 1, 1] = g11 / det
        inv[..., 0, 1] = inv[..., 1, 0] = -g12 / det
    coef = np.sqrt(det)[..., None, None] * inv
    return MetricEval(g, det, inv, coef)


def metric_from_chart(c: SurfaceChart, point: Sequence, eta: float | None = None,
                      fast: Sequence | None = None) -> MetricEval:
    """Metric, determinant, inverse and LB coefficient of ``c`` at ``point``."""
    return metric_from_tangents(c.tangents(point, fast, eta))


# -- 1D two-scale metrics ----------------------------------------------------------

@dataclass(frozen=True)
class TwoScaleMetric:
    """Scalar curve metric ``g(X, Y)``, unit-periodic in the fast variable Y."""

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "metric"
    period: float = 1.0

    def __call__(self, x, y) -> np.ndarray:
        return self.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    @classmethod
    def from_chart(cls, chart: SurfaceChart, eta: float) -> "TwoScaleMetric":
        if chart.dim != 1:
            raise ValueError("TwoScaleMetric needs a curve chart")

        def g(x, y):
            return metric_from_chart(chart, [x], eta, [y] if chart.two_scale else None).g[..., 0, 0]

        return cls(g, "chart")

    def coefficient(self) -> ScalarCoefficient:
        """``kappa(X1, Y1) = g^-1/2`` as a coefficient object."""
        return ScalarCoefficient(_InvSqrtMetric(self))

    def validate_periodicity(self, n_checks: int = 100, seed: int = 0) -> PeriodicityReport:
        return validate_periodicity(self.coefficient(), self.period, n_checks, "Y1",
                                    {"ETA": 1.0}, seed)


@dataclass(frozen=True)
class _InvSqrtMetric:
    metric: TwoScaleMetric
    variables: frozenset = field(default=frozenset({"X1", "Y1", "ETA"}))

    @property
    def source(self) -> str:
        return f"{self.metric.name}(X1, Y1)^(-1/2)"

    def __call__(self, X1=0.0, Y1=0.0, **_):
        return lb_coefficient_1d(self.metric, X1, Y1)


def wrinkled_curve_metric() -> TwoScaleMetric:
    """Metric of ``x(X) = (X, sin(pi X) + eta sin(2 pi X / eta))`` with ``Y = X/eta``."""
    pi2 = math.pi ** 2

    def g(x, y):
        cx = np.cos(math.pi * x)
        cy = np.cos(2 * math.pi * y)
        return 1.0 + pi2 * (cx * cx + 4.0 * cx * cy + 4.0 * cy * cy)

    return TwoScaleMetric(g, "wrinkled_curve")


def wrinkled_curve_chart() -> SurfaceChart:
    return SurfaceChart.curve("X1", "sin(pi*X1) + ETA*sin(2*pi*Y1)")


def lb_coefficient_1d(g: TwoScaleMetric, x, y):
    """``kappa(X, Y) = g(X, Y)^-1/2``."""
    gv = g(x, y)
    if np.any(~(gv > 0)):
        raise DegenerateMetricError("metric must be positive")
    out = 1.0 / np.sqrt(gv)
    return float(out) if np.ndim(out) == 0 else out


def homogenize_pointwise_1d(g: TwoScaleMetric, macro_nodes: Grid1D | np.ndarray,
                            n_quad: int = 64) -> np.ndarray:
    """Harmonic mean over one fast period at every macro node."""
    x = macro_nodes.nodes if isinstance(macro_nodes, Grid1D) else np.asarray(macro_nodes, dtype=float)
    out = homog1d.harmonic_mean(g.coefficient(), n_quad, g.period, slow={"X1": x})
    return np.broadcast_to(out, x.shape).copy()


def khat_function(g: TwoScaleMetric, n_quad: int = 64) -> Callable[[np.ndarray], np.ndarray]:
    def khat(x):
        return homogenize_pointwise_1d(g, np.asarray(x, dtype=float), n_quad)

    return khat


def solve_lb_1d(g: TwoScaleMetric, eta: float, h: float, mode: str = "exact",
                grid: Grid1D | None = None, n_quad: int | None = None,
                cell_quad: int = 64) -> SolutionField:
    """LB problem on [0, 1] with ``U(0) = 0`` and end flux ``h``.

    ``mode="exact"`` integrates ``kappa(X; eta) = g(X, X/eta)^-1/2``;
    ``mode="homogenized"`` uses the pointwise harmonic mean.
    """
    grid = grid or Grid1D(0.0, 1.0, homog1d.OUTPUT_NODES)
    if mode == "exact":
        return homog1d.solve_bvp_1d(BVP1D(g.coefficient(), eta, 0.0, h), n_quad, grid)
    if mode == "homogenized":
        return homog1d.solve_homogenized_1d(khat_function(g, cell_quad), 0.0, h, grid)
    raise ValueError(f"unknown mode {mode!r}")


# -- 2D pointwise cell problems -----------------------------------------------------

def lb_cell_problem(chart: SurfaceChart, point: Sequence[float], n: int, eta: float) -> CellProblem2D:
    """Cell coefficient ``A(X, .)`` with the slow point frozen."""
    grid = PeriodicGrid2D(1.0, n)
    y1, y2 = grid.mesh()
    x = [np.full_like(y1, float(point[0])), np.full_like(y1, float(point[1]))]
    m = metric_from_chart(chart, x, eta, [y1, y2] if chart.two_scale else None)
    return CellProblem2D.from_matrix(grid, m.coefficient)


class CellCache:
    """Homogenized tensors keyed by macro point index."""

    def __init__(self):
        self._store: dict[int, HomogenizedTensor] = {}

    def get(self, key: int, compute: Callable[[], HomogenizedTensor]) -> HomogenizedTensor:
        if key not in self._store:
            self._store[key] = compute()
        return self._store[key]

    def __len__(self) -> int:
        return len(self._store)


def homogenize_lb_2d(chart: SurfaceChart, macro_points: Sequence[Sequence[float]], n: int = 32,
                     eta: float = 1.0, tol: float = 1e-10, threads: int = 1,
                     cache: CellCache | None = None) -> list[HomogenizedTensor]:
    """Effective LB tensor at each macro point (one periodic cell solve per point)."""
    if chart.dim != 2:
        raise ValueError("homogenize_lb_2d needs a surface chart")
    cache = cache if cache is not None else CellCache()
    points = [tuple(map(float, p)) for p in macro_points]

    def work(k: int) -> HomogenizedTensor:
        def compute():
            t, _, _ = homogenize_cell(lb_cell_problem(chart, points[k], n, eta), tol)
            return t
        return cache.get(k, compute)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(work, range(len(points))))
    return [work(k) for k in range(len(points))]


def wrinkled_surface_chart() -> SurfaceChart:
    """``f = X1 X2 + eta sin(2 pi X1/eta) sin(2 pi X2/eta)`` written two-scale."""
    return SurfaceChart.graph("X1*X2 + ETA*sin(2*pi*Y1)*sin(2*pi*Y2)")


# -- geometric checks -------------------------------------------------------------

@dataclass(frozen=True)
class DualBasisReport:
    passed: bool
    biorthogonality_error: float
    gram_error: float


def dual_basis_check(c: SurfaceChart, point: Sequence[float], eta: float | None = None,
                     tol: float = 1e-8) -> DualBasisReport:
    """Check ``x^i . x_j = delta_ij`` and ``x^i . x^j = g^-1_ij`` for ``x^i = g^-1_ik x_k``."""
    t = c.tangents(point, None, eta)
    m = metric_from_tangents(t)
    dual = np.einsum("...ik,...ka->...ia", m.inv, t)
    bi = np.einsum("...ia,...ja->...ij", dual, t)
    gram = np.einsum("...ia,...ja->...ij", dual, dual)
    e1 = float(np.max(np.abs(bi - np.eye(c.dim))))
    e2 = float(np.max(np.abs(gram - m.inv)))
    return DualBasisReport(e1 <= tol and e2 <= tol, e1, e2)


@dataclass(frozen=True)
class DivergenceReport:
    steps: np.ndarray
    estimates: np.ndarray
    reference: float
    errors: np.ndarray
    orders: np.ndarray

    @property
    def order(self) -> float:
        return float(self.orders[-1]) if len(self.orders) else float("nan")


def _gradient(u: Expression, x1, x2, s: float = FD_STEP) -> tuple:
    d1 = (u(X1=x1 + s, X2=x2) - u(X1=x1 - s, X2=x2)) / (2 * s)
    d2 = (u(X1=x1, X2=x2 + s) - u(X1=x1, X2=x2 - s)) / (2 * s)
    return d1, d2


def _components(c: SurfaceChart, u: Expression, x1, x2, eta):
    """Contravariant gradient components ``V_i = g^-1_ij dU/dX_j`` and the metric."""
    m = metric_from_chart(c, [x1, x2], eta)
    d1, d2 = _gradient(u, x1, x2)
    v1 = m.inv[..., 0, 0] * d1 + m.inv[..., 0, 1] * d2
    v2 = m.inv[..., 1, 0] * d1 + m.inv[..., 1, 1] * d2
    return v1, v2, m


def flux_balance(c: SurfaceChart, u: Expression, point: Sequence[float], step: float,
                 eta: float | None = None) -> float:
    """Net outflow of ``grad_M U`` through a coordinate rectangle, per surface area."""
    x1, x2 = map(float, point)
    d = 0.5 * step
    v1r, _, mr = _components(c, u, x1 + d, x2, eta)
    v1l, _, ml = _components(c, u, x1 - d, x2, eta)
    _, v2t, mt = _components(c, u, x1, x2 + d, eta)
    _, v2b, mb = _components(c, u, x1, x2 - d, eta)

    def side(m, i, j):
        # sqrt(g_ii) / sqrt(g^-1_jj): length factor over the normal projection
        return math.sqrt(float(m.g[..., i, i])) / math.sqrt(float(m.inv[..., j, j]))

    top = v2t * step * side(mt, 0, 1)
    bottom = -v2b * step * side(mb, 0, 1)
    right = v1r * step * side(mr, 1, 0)
    left = -v1l * step * side(ml, 1, 0)
    centre = metric_from_chart(c, [x1, x2], eta)
    return float((top + bottom + right + left) / (math.sqrt(float(centre.det)) * step * step))


def laplace_beltrami(c: SurfaceChart, u: Expression, point: Sequence[float],
                     eta: float | None = None, step: float = 1e-3) -> float:
    """``(1/sqrt|g|) d_i (sqrt|g| g^-1_ij d_j U)`` with fourth-order outer differences."""
    x1, x2 = map(float, point)

    def flux(i, a, b):
        v1, v2, m = _components(c, u, a, b, eta)
        return math.sqrt(float(m.det)) * float(v1 if i == 0 else v2)

    total = 0.0
    for i in range(2):
        e = (1.0, 0.0) if i == 0 else (0.0, 1.0)
        vals = [flux(i, x1 + k * step * e[0], x2 + k * step * e[1]) for k in (-2, -1, 1, 2)]
        total += (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * step)
    return total / math.sqrt(float(metric_from_chart(c, [x1, x2], eta).det))


def divergence_consistency_check(c: SurfaceChart, u, point: Sequence[float],
                                 steps: Sequence[float] = (0.1, 0.05, 0.025),
                                 eta: float | None = None) -> DivergenceReport:
    """Compare the flux-balance divergence with the closed-form operator as steps shrink."""
    u = _expr(u)
    steps = np.asarray(steps, dtype=float)
    ref = laplace_beltrami(c, u, point, eta)
    est = np.array([flux_balance(c, u, point, s, eta) for s in steps])
    err = np.abs(est - ref)
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log(err[:-1] / err[1:]) / np.log(steps[:-1] / steps[1:])
    return DivergenceReport(steps, est, ref, err, orders)
