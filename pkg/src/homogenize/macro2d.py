"""Fully resolved and homogenized conduction on the unit square.

Boundary conditions: ``U = u0`` on X1 = 0, prescribed outward normal flux
``h`` on X1 = 1, insulated on X2 = 0 and X2 = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .cell2d import HomogenizedTensor
from .fields import ScalarCoefficient, check_spd
from .homog1d import SolutionField
from .linalg import BoundedOperator, pcg

DEFAULT_TOL = 1e-10
MAX_RESOLUTION = 1024

TensorField = Callable[[np.ndarray, np.ndarray], Union[HomogenizedTensor, np.ndarray]]


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class MacroProblem2D:
    coefficient: Union[ScalarCoefficient, HomogenizedTensor, TensorField]
    resolution: int
    h: float = 1.0
    eta: float | None = None
    u0: float = 0.0
    cells_per_period: float = 20.0

    def centers(self) -> np.ndarray:
        return (np.arange(self.resolution) + 0.5) / self.resolution


def _solve(op: BoundedOperator, p: MacroProblem2D, tol: float) -> SolutionField:
    m = p.resolution
    b = np.zeros((m, m))
    b[-1, :] = p.h / m
    result = pcg(op.apply, b, op.precondition, tol, 10 * m * m)
    x = p.centers()
    return SolutionField((x, x.copy()), result.x + p.u0)


def solve_multiscale_2d(p: MacroProblem2D, tol: float = DEFAULT_TOL,
                        max_resolution: int = MAX_RESOLUTION) -> SolutionField:
    """Finite-volume solve with the scalar coefficient sampled at cell centres."""
    c = p.coefficient
    if not isinstance(c, ScalarCoefficient):
        raise TypeError("multiscale solves need a ScalarCoefficient")
    m = p.resolution
    if p.eta is not None and m < math.ceil(p.cells_per_period / p.eta - 1e-9):
        raise ResolutionError(f"M={m} under-resolves eta={p.eta}; need M >= {p.cells_per_period}/eta")
    if m > max_resolution:
        raise ResolutionError(f"M={m} exceeds the desk-scale cap of {max_resolution}")
    x = p.centers()
    kappa = _sample(c, *np.meshgrid(x, x, indexing="ij"), p.eta)
    return _solve(BoundedOperator(kappa), p, tol)


def _sample(c: ScalarCoefficient, x1: np.ndarray, x2: np.ndarray, eta: float | None) -> np.ndarray:
    b = {"X1": x1, "X2": x2}
    if eta is not None:
        b["ETA"] = eta
        if c.uses("Y1") or c.uses("Y2"):
            b["Y1"], b["Y2"] = x1 / eta, x2 / eta
    return c.evaluate(**b)


def tensor_samples(t, x1: np.ndarray, x2: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(t, HomogenizedTensor):
        shape = x1.shape
        a11, a22 = np.full(shape, t.k11), np.full(shape, t.k22)
        a12 = np.full(shape, 0.5 * (t.k12 + t.k21))
    else:
        v = t(x1, x2)
        if isinstance(v, HomogenizedTensor):
            return tensor_samples(v, x1, x2)
        v = np.asarray(v, dtype=float)
        a11, a22 = v[..., 0, 0], v[..., 1, 1]
        a12 = 0.5 * (v[..., 0, 1] + v[..., 1, 0])
    check_spd(a11, a12, a22)
    return a11, a12, a22


def solve_homogenized_2d(t, resolution: int, h: float = 1.0, u0: float = 0.0,
                         tol: float = DEFAULT_TOL) -> SolutionField:
    """Solve with a constant tensor or a field ``(X1, X2) -> (..., 2, 2)``."""
    p = MacroProblem2D(t, resolution, h, u0=u0)
    x = p.centers()
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    a11, a12, a22 = tensor_samples(t, x1, x2)
    return _solve(BoundedOperator(a11, a22, a12), p, tol)


def wall_fluxes(p: MacroProblem2D, u: SolutionField) -> tuple[float, float]:
    """Total flux leaving through X1 = 0 and entering through X1 = 1."""
    if not isinstance(p.coefficient, ScalarCoefficient):
        raise TypeError("wall fluxes are reported for scalar coefficients")
    x = p.centers()
    k0 = _sample(p.coefficient, np.full_like(x, x[0]), x, p.eta)
    left = float(np.sum(2.0 * k0 * (u.values[0] - p.u0)))
    return left, p.h


def _interpolate(src: SolutionField, coords: tuple) -> np.ndarray:
    if src.ndim == 1:
        return np.interp(coords[0], src.coords[0], src.values)
    f = RegularGridInterpolator(src.coords, src.values, method="linear",
                                bounds_error=False, fill_value=None)
    g1, g2 = np.meshgrid(*coords, indexing="ij")
    return f(np.stack([g1, g2], axis=-1))


def error_norms(a: SolutionField, b: SolutionField) -> tuple[float, float]:
    """Max norm and discrete L2 norm of ``a - b`` on the finer of the two grids.

    The coarser field is interpolated (linearly / bilinearly).  The L2 norm is
    ``sqrt(mean(d^2) * measure)`` over the grid's bounding box.
    """
    if a.ndim != b.ndim:
        raise ValueError("fields live on domains of different dimension")
    for ca, cb in zip(a.coords, b.coords):
        if not (np.isclose(ca[0], cb[0], atol=1.0 / len(cb)) and np.isclose(ca[-1], cb[-1], atol=1.0 / len(cb))):
            raise ValueError("fields cover incompatible domains")
    same = all(len(ca) == len(cb) and np.array_equal(ca, cb) for ca, cb in zip(a.coords, b.coords))
    if same:
        diff = a.values - b.values
        coords = a.coords
    elif a.values.size >= b.values.size:
        diff = a.values - _interpolate(b, a.coords)
        coords = a.coords
    else:
        diff = _interpolate(a, b.coords) - b.values
        coords = b.coords
    if a.ndim == 1:
        measure = coords[0][-1] - coords[0][0]
    else:
        # cell-centred grids cover the unit square
        measure = 1.0
    return float(np.max(np.abs(diff))), float(np.sqrt(np.mean(diff * diff) * measure))


def solution_table(u: SolutionField) -> np.ndarray:
    """Rows ``(X1, X2, U)``."""
    x1, x2 = np.meshgrid(*u.coords, indexing="ij")
    return np.column_stack([x1.ravel(), x2.ravel(), u.values.ravel()])
