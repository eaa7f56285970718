"""Coefficient fields and the uniform grids they are sampled on."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .expr import Expression

Number = Union[float, np.ndarray]


class EllipticityError(ValueError):
    """A sampled coefficient fell below its positivity floor."""

    def __init__(self, message: str, point: Mapping[str, float] | None = None):
        self.point = dict(point or {})
        super().__init__(message)


def _as_expression(source) -> Expression | Callable:
    if isinstance(source, Expression) or callable(source):
        return source
    return Expression(source)


class ScalarCoefficient:
    """Scalar conductivity given by an expression (or a Python callable).

    Variables are X1, X2 (slow), Y1, Y2 (fast, unit period unless stated
    otherwise) and ETA.  A callable is invoked with the same keyword
    arguments and must accept numpy arrays.
    """

    def __init__(self, source, kappa_min: float = 1e-12):
        if kappa_min <= 0:
            raise ValueError("kappa_min must be positive")
        self.func = _as_expression(source)
        self.kappa_min = float(kappa_min)

    @property
    def source(self) -> str:
        return getattr(self.func, "source", repr(self.func))

    @property
    def variables(self) -> frozenset[str]:
        return getattr(self.func, "variables", frozenset(("X1", "X2", "Y1", "Y2", "ETA")))

    def uses(self, name: str) -> bool:
        return name in self.variables

    def __call__(self, **bindings: Number) -> Number:
        return self.func(**bindings)

    def evaluate(self, **bindings: Number) -> np.ndarray:
        """Evaluate and broadcast to an array, checking ellipticity."""
        values = np.asarray(self.func(**bindings), dtype=float)
        shape = np.broadcast_shapes(values.shape, *(np.shape(v) for v in bindings.values()))
        values = np.broadcast_to(values, shape)
        self.check(values, bindings)
        return values

    def check(self, values: np.ndarray, bindings: Mapping[str, Number] | None = None) -> None:
        bad = ~(values >= self.kappa_min)
        if np.any(bad):
            idx = np.unravel_index(np.argmax(bad), values.shape) if values.ndim else ()
            point = {}
            for name, v in (bindings or {}).items():
                arr = np.broadcast_to(np.asarray(v, dtype=float), values.shape)
                point[name] = float(arr[idx])
            raise EllipticityError(
                f"coefficient {self.source!r} = {float(values[idx])!r} below floor "
                f"{self.kappa_min!r} at {point}", point)

    def __repr__(self) -> str:
        return f"ScalarCoefficient({self.source!r})"


class MatrixCoefficient:
    """Symmetric 2x2 coefficient with four entry expressions."""

    def __init__(self, a11, a12, a21, a22, symmetric: bool = True):
        self.entries = tuple(_as_expression(s) for s in (a11, a12, a21, a22))
        self.symmetric = symmetric

    def evaluate(self, **bindings: Number) -> np.ndarray:
        """Return an array of shape ``(..., 2, 2)`` after validating SPD."""
        vals = [np.asarray(e(**bindings), dtype=float) for e in self.entries]
        shape = np.broadcast_shapes(*(v.shape for v in vals), *(np.shape(v) for v in bindings.values()))
        a11, a12, a21, a22 = (np.broadcast_to(v, shape) for v in vals)
        if self.symmetric and np.any(np.abs(a12 - a21) > 1e-12):
            raise EllipticityError("matrix coefficient is not symmetric")
        check_spd(a11, 0.5 * (a12 + a21), a22)
        out = np.empty(shape + (2, 2))
        out[..., 0, 0], out[..., 0, 1], out[..., 1, 0], out[..., 1, 1] = a11, a12, a21, a22
        return out


def check_spd(a11, a12, a22) -> None:
    """Raise unless every symmetric 2x2 matrix [[a11, a12], [a12, a22]] is SPD."""
    tr = a11 + a22
    det = a11 * a22 - a12 * a12
    if not (np.all(tr > 0) and np.all(det > 0)):
        raise EllipticityError("matrix coefficient is not positive definite")


@dataclass(frozen=True)
class Grid1D:
    """Uniform nodal grid on ``[a, b]`` bound to one coordinate variable."""

    a: float
    b: float
    n: int
    variable: str = "X1"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("Grid1D needs at least two nodes")
        if not self.b > self.a:
            raise ValueError("Grid1D needs b > a")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)


@dataclass(frozen=True)
class PeriodicGrid2D:
    """N x N cell-centred grid on the periodic square ``[0, L]^2``.

    Arrays sampled on this grid are indexed ``[i, j]`` with ``i`` along Y1.
    """

    length: float = 1.0
    n: int = 64

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("cell length must be positive")
        if self.n < 1:
            raise ValueError("resolution must be positive")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.h

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        c = self.centers
        return np.meshgrid(c, c, indexing="ij")

    def wrap(self, i: int, j: int) -> tuple[int, int]:
        return i % self.n, j % self.n

    @property
    def cell_area(self) -> float:
        return self.h * self.h


def point_bindings(slow_point: Optional[Sequence[float] | float] = None,
                   eta: Optional[float] = None) -> dict[str, Number]:
    b: dict[str, Number] = {}
    if slow_point is not None:
        pts = np.atleast_1d(np.asarray(slow_point, dtype=float))
        for k, v in enumerate(pts[:2]):
            b[f"X{k + 1}"] = float(v)
    if eta is not None:
        b["ETA"] = float(eta)
    return b


def sample_scalar(c: ScalarCoefficient, grid: Grid1D | PeriodicGrid2D,
                  slow_point=None, eta: Optional[float] = None) -> np.ndarray:
    """Sample ``c`` at the nodes of a Grid1D or the cell centres of a PeriodicGrid2D."""
    b = point_bindings(slow_point, eta)
    if isinstance(grid, Grid1D):
        b[grid.variable] = grid.nodes
        shape = (grid.n,)
    else:
        y1, y2 = grid.mesh()
        b["Y1"], b["Y2"] = y1, y2
        shape = (grid.n, grid.n)
    values = np.broadcast_to(np.asarray(c(**b), dtype=float), shape).copy()
    c.check(values, b)
    return values


@dataclass(frozen=True)
class PeriodicityReport:
    passed: bool
    worst_violation: float
    worst_point: float
    n_checks: int


def validate_periodicity(c: ScalarCoefficient, period: float, n_checks: int = 100,
                         variable: str = "Y1", bindings: Mapping[str, float] | None = None,
                         seed: int = 0) -> PeriodicityReport:
    """Check ``|c(y) - c(y + period)| <= 1e-9 (1 + |c(y)|)`` at random points.

    Points are drawn uniformly from ``[0, period)`` in ``variable``; any other
    variables the coefficient needs come from ``bindings``.
    """
    if period <= 0:
        raise ValueError("period must be positive")
    rng = np.random.default_rng(seed)
    y = rng.uniform(0.0, period, n_checks)
    base = dict(bindings or {})
    for name in c.variables:
        if name != variable and name not in base:
            base[name] = rng.uniform(0.0, 1.0, n_checks)
    with np.errstate(all="ignore"):
        c0 = np.broadcast_to(np.asarray(c(**{**base, variable: y}), dtype=float), y.shape)
        c1 = np.broadcast_to(np.asarray(c(**{**base, variable: y + period}), dtype=float), y.shape)
    violation = np.abs(c0 - c1) / (1.0 + np.abs(c0))
    k = int(np.argmax(violation))
    raw = float(np.abs(c0 - c1)[k])
    return PeriodicityReport(bool(np.all(violation <= 1e-9)), raw, float(y[k]), n_checks)
