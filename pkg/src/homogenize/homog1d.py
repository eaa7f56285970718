"""One-dimensional multiscale solves, cell correctors and effective conductivity.

With no source term the flux ``kappa dU/dX`` is constant, so every 1D
problem here reduces to a running integral of ``1/kappa``.  Solutions are
evaluated by composite Gauss-Legendre quadrature rather than by discretising
an ODE, which keeps discretisation error out of the convergence studies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import quadrature
from .fields import EllipticityError, Grid1D, ScalarCoefficient

OUTPUT_NODES = 2001


@dataclass(frozen=True)
class SolutionField:
    """Samples of a solution on a grid.

    For 1D fields ``coords`` is ``(x,)``; for 2D fields it is ``(x1, x2)``
    with ``values[i, j]`` located at ``(x1[i], x2[j])``.
    """

    coords: tuple
    values: np.ndarray

    @property
    def ndim(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class BVP1D:
    """``d/dX(kappa dU/dX) = 0`` on [0, 1], ``U(0) = u0``, ``kappa dU/dX(1) = h``."""

    conductivity: ScalarCoefficient
    eta: float
    u0: float = 0.0
    h: float = 1.0
    period: float = 1.0  # fast period in Y when the coefficient uses Y1

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")


def multiscale_bindings(c: ScalarCoefficient, x: np.ndarray, eta: float) -> dict:
    """Bind X1 and ETA, and Y1 = X1/eta when the coefficient is written two-scale."""
    b = {"X1": x, "ETA": eta}
    if c.uses("Y1"):
        b["Y1"] = x / eta
    return b


def solve_bvp_1d(p: BVP1D, n_quad: int | None = None, grid: Grid1D | None = None) -> SolutionField:
    """Exact solution ``U(X) = u0 + h * int_0^X dxi / kappa(xi; eta)``.

    ``n_quad`` is the minimum number of quadrature panels over [0, 1] and
    must be at least ``20 / eta``.
    """
    min_panels = math.ceil(20.0 / p.eta)
    if n_quad is None:
        n_quad = min_panels
    if n_quad < min_panels:
        raise quadrature.QuadratureError(
            f"n_quad={n_quad} under-resolves eta={p.eta}; need at least {min_panels}")
    grid = grid or Grid1D(0.0, 1.0, OUTPUT_NODES)
    c = p.conductivity

    def inv_kappa(x):
        return 1.0 / c.evaluate(**multiscale_bindings(c, x, p.eta))

    running = quadrature.cumulative_checked(inv_kappa, grid.nodes, n_quad)
    return SolutionField((grid.nodes,), p.u0 + p.h * running)


# -- cell quantities -----------------------------------------------------------

def _cell_inverse(kappa: ScalarCoefficient, slow) -> Callable[[np.ndarray], np.ndarray]:
    """Return y -> 1/kappa(slow, y); ``slow`` may be an array of slow points."""
    bind = {}
    if slow is not None:
        for k, v in slow.items():
            arr = np.asarray(v, dtype=float)
            bind[k] = arr[..., None] if arr.ndim else float(arr)

    def f(y):
        return 1.0 / kappa.evaluate(**bind, Y1=y)

    return f


def harmonic_mean(kappa_cell: ScalarCoefficient, n_quad: int = 64, length: float = 1.0,
                  slow: dict | None = None) -> Union[float, np.ndarray]:
    """Effective 1D conductivity ``(1/L int_0^L dxi/kappa)^-1`` over one cell.

    The cell coordinate is Y1.  ``slow`` binds any slow variables (X1, ETA);
    array-valued slow bindings give one mean per slow point.
    """
    if length <= 0:
        raise ValueError("cell length must be positive")
    integral, _ = quadrature.integrate_checked(_cell_inverse(kappa_cell, slow), 0.0, length, n_quad)
    out = length / integral
    return float(out) if np.ndim(out) == 0 else out


def arithmetic_mean(kappa_cell: ScalarCoefficient, n_quad: int = 64, length: float = 1.0,
                    slow: dict | None = None) -> float:
    bind = {k: float(v) for k, v in (slow or {}).items()}
    integral, _ = quadrature.integrate_checked(
        lambda y: kappa_cell.evaluate(**bind, Y1=y), 0.0, length, n_quad)
    return float(integral) / length


@dataclass(frozen=True)
class Corrector1D:
    """Unit-gradient corrector chi_1 on the nodes of a cell grid."""

    grid: Grid1D
    values: np.ndarray
    kappa_values: np.ndarray
    khat: float

    @property
    def length(self) -> float:
        return self.grid.b - self.grid.a

    def slope(self, kappa_at_y: np.ndarray) -> np.ndarray:
        """Closed-form derivative ``khat / kappa - 1``."""
        return self.khat / kappa_at_y - 1.0


def corrector_1d(kappa_cell: ScalarCoefficient, grid: Grid1D, n_quad: int = 64) -> Corrector1D:
    """``chi_1(Y) = -Y + khat * int_0^Y dxi/kappa`` on ``grid`` (cell [0, L])."""
    if grid.a != 0.0:
        raise ValueError("cell grid must start at Y = 0")
    length = grid.b
    khat = harmonic_mean(kappa_cell, n_quad, length)
    y = grid.nodes
    inv = _cell_inverse(kappa_cell, None)
    running = quadrature.cumulative_checked(inv, y, n_quad)
    chi = -y + khat * running
    chi[0] = 0.0
    chi[-1] = 0.0
    kappa_vals = kappa_cell.evaluate(Y1=y)
    return Corrector1D(Grid1D(0.0, length, grid.n, "Y1"), chi, np.array(kappa_vals), khat)


def flux_form_mean(kappa_cell: ScalarCoefficient, chi: Corrector1D, n_quad: int = 64) -> float:
    """``(1/L) int_0^L kappa (1 + dchi_1/dY) dY`` with the closed-form slope."""
    sampled = kappa_cell.evaluate(Y1=chi.grid.nodes)
    if not np.allclose(sampled, chi.kappa_values, rtol=1e-12, atol=0.0):
        raise ValueError("corrector was computed for a different cell coefficient")

    def integrand(y):
        k = kappa_cell.evaluate(Y1=y)
        return k * (1.0 + chi.slope(k))

    integral, _ = quadrature.integrate_checked(integrand, 0.0, chi.length, n_quad)
    return float(integral) / chi.length


def solve_homogenized_1d(khat: float | Callable[[np.ndarray], np.ndarray], u0: float, h: float,
                         grid: Grid1D | None = None, n_quad: int = 200) -> SolutionField:
    """``U(X) = u0 + h * int_0^X dxi / khat(xi)``; linear when ``khat`` is constant."""
    grid = grid or Grid1D(0.0, 1.0, OUTPUT_NODES)
    x = grid.nodes
    if callable(khat):
        def inv(xi):
            k = np.asarray(khat(xi), dtype=float)
            if np.any(~(k > 0)):
                raise EllipticityError("homogenized conductivity must be positive")
            return 1.0 / k

        running = quadrature.cumulative_checked(inv, x, n_quad)
        return SolutionField((x,), u0 + h * running)
    if not khat > 0:
        raise EllipticityError("homogenized conductivity must be positive")
    return SolutionField((x,), u0 + h * (x - x[0]) / khat)
