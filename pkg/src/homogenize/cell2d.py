"""Periodic 2D cell problems, correctors and the effective conductivity tensor.

The corrector for a unit gradient ``e_j`` solves
``div(A (grad chi_j + e_j)) = 0`` with periodic ``chi_j`` on ``[0, L]^2``.
Finite volumes on cell centres; the discrete tensor is the average face
flux, which is symmetric up to the solver tolerance because the discrete
operator is.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import EllipticityError, PeriodicGrid2D, ScalarCoefficient, check_spd, sample_scalar
from .linalg import PeriodicOperator, SolverError, pcg

DEFAULT_N = 64
DEFAULT_TOL = 1e-10


@dataclass
class CellProblem2D:
    """Sampled coefficient on a periodic cell; scalar when ``a12`` is None and a22 is a11."""

    grid: PeriodicGrid2D
    a11: np.ndarray
    a22: Optional[np.ndarray] = None
    a12: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.grid.n
        if self.a22 is None:
            self.a22 = self.a11
        for a in (self.a11, self.a22) + ((self.a12,) if self.a12 is not None else ()):
            if a.shape != (n, n):
                raise ValueError(f"coefficient shape {a.shape} does not match grid {n}x{n}")
        if self.a12 is None:
            if np.any(~(self.a11 > 0)) or np.any(~(self.a22 > 0)):
                raise EllipticityError("cell coefficient must be positive")
        else:
            check_spd(self.a11, self.a12, self.a22)
        self._op: Optional[PeriodicOperator] = None

    @classmethod
    def from_scalar(cls, kappa: ScalarCoefficient, grid: PeriodicGrid2D,
                    slow_point=None, eta: float | None = None) -> "CellProblem2D":
        return cls(grid, sample_scalar(kappa, grid, slow_point, eta))

    @classmethod
    def from_matrix(cls, grid: PeriodicGrid2D, a: np.ndarray) -> "CellProblem2D":
        """From an ``(N, N, 2, 2)`` array of symmetric matrices."""
        return cls(grid, a[..., 0, 0].copy(), a[..., 1, 1].copy(),
                   0.5 * (a[..., 0, 1] + a[..., 1, 0]))

    @property
    def is_scalar(self) -> bool:
        return self.a12 is None and self.a22 is self.a11

    @property
    def kappa(self) -> np.ndarray:
        return self.a11

    @property
    def operator(self) -> PeriodicOperator:
        if self._op is None:
            self._op = PeriodicOperator(self.a11, self.a22, self.a12, self.grid.length)
        return self._op

    def is_homogeneous(self) -> bool:
        off = self.a12 is None or not np.any(self.a12)
        return off and bool(np.all(self.a11 == self.a11.flat[0]) and np.all(self.a22 == self.a22.flat[0]))


@dataclass(frozen=True)
class Corrector2D:
    """Zero-mean periodic corrector for a unit gradient along ``direction`` (1 or 2)."""

    values: np.ndarray
    direction: int
    iterations: int
    residual: float
    mean_shift: float

    @property
    def gradient(self) -> tuple[float, float]:
        return (1.0, 0.0) if self.direction == 1 else (0.0, 1.0)


@dataclass(frozen=True)
class HomogenizedTensor:
    k11: float
    k12: float
    k21: float
    k22: float

    @classmethod
    def from_matrix(cls, m) -> "HomogenizedTensor":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @classmethod
    def isotropic(cls, c: float) -> "HomogenizedTensor":
        return cls(c, 0.0, 0.0, c)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.k11, self.k12], [self.k21, self.k22]])

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.T))

    def is_spd(self) -> bool:
        m = self.matrix
        return bool(np.trace(m) > 0 and np.linalg.det(m) > 0)

    def as_dict(self) -> dict[str, float]:
        return {"k11": self.k11, "k12": self.k12, "k21": self.k21, "k22": self.k22}


def solve_cell_2d(p: CellProblem2D, direction: int, tol: float = DEFAULT_TOL) -> Corrector2D:
    """Solve the cell problem for a unit gradient along ``direction``."""
    n = p.grid.n
    if n < 8:
        raise ValueError("cell resolution must be at least 8")
    if not 0 < tol <= 1e-4:
        raise ValueError("tol must lie in (0, 1e-4]")
    if direction not in (1, 2):
        raise ValueError("direction must be 1 or 2")
    if p.is_homogeneous():
        return Corrector2D(np.zeros((n, n)), direction, 0, 0.0, 0.0)
    op = p.operator
    grad = (1.0, 0.0) if direction == 1 else (0.0, 1.0)
    b = op.rhs(grad)
    result = pcg(op.apply, b, op.precondition, tol, 10 * n * n, project=op.project)
    x = result.x
    shift = float(x.mean())
    return Corrector2D(x - shift, direction, result.iterations, result.residual, shift)


def _fluxes(p: CellProblem2D, chi: Corrector2D) -> tuple[np.ndarray, np.ndarray]:
    op = p.operator
    if chi.values.shape != op.shape:
        raise ValueError("corrector and cell grids differ")
    return op.fluxes(op.extend(chi.values) + op.affine(chi.gradient))


def assemble_tensor(p: CellProblem2D, chi1: Corrector2D, chi2: Corrector2D) -> HomogenizedTensor:
    """Average flux per unit applied gradient: ``k_jl = (1/L^2) int [A (e_l + grad chi_l)]_j``."""
    n, h = p.grid.n, p.grid.h
    m = np.empty((2, 2))
    for col, chi in enumerate((chi1, chi2)):
        fx, fy = _fluxes(p, chi)
        m[0, col] = fx.sum() / (n * n * h)
        m[1, col] = fy.sum() / (n * n * h)
    return HomogenizedTensor.from_matrix(m)


def homogenize_cell(p: CellProblem2D, tol: float = DEFAULT_TOL
                    ) -> tuple[HomogenizedTensor, Corrector2D, Corrector2D]:
    chi1 = solve_cell_2d(p, 1, tol)
    chi2 = solve_cell_2d(p, 2, tol)
    return assemble_tensor(p, chi1, chi2), chi1, chi2


def cross_section_fluxes(p: CellProblem2D, chi: Corrector2D, direction: int) -> np.ndarray:
    """Total flux through every cross-section normal to ``direction``.

    Entry ``i`` is the flux through the faces on the low side of cell column
    (or row) ``i``.
    """
    fx, fy = _fluxes(p, chi)
    n = p.grid.n
    if direction == 1:
        return fx[:n].sum(axis=1)
    if direction == 2:
        return fy[:, :n].sum(axis=0)
    raise ValueError("direction must be 1 or 2")


def cross_section_flux(p: CellProblem2D, chi: Corrector2D, direction: int, position: int) -> float:
    if not 0 <= position < p.grid.n:
        raise IndexError(f"cross-section index {position} outside 0..{p.grid.n - 1}")
    return float(cross_section_fluxes(p, chi, direction)[position])


def flux_spread(p: CellProblem2D, chi: Corrector2D, direction: int) -> float:
    """Standard deviation of the cross-section fluxes relative to the gross flux.

    The gross flux (mean over sections of the summed absolute face fluxes)
    stays meaningful when the net flux is zero, e.g. off-diagonal loading of
    a laminate.
    """
    q = cross_section_fluxes(p, chi, direction)
    fx, fy = _fluxes(p, chi)
    n = p.grid.n
    gross = np.abs(fx[:n]).sum() / n if direction == 1 else np.abs(fy[:, :n]).sum() / n
    scale = max(abs(q.mean()), gross, np.finfo(float).tiny)
    return float(q.std() / scale)


def cell_divergence(p: CellProblem2D, chi: Corrector2D) -> np.ndarray:
    """Net flux out of every control volume (zero for an exact solve)."""
    op = p.operator
    return -op.fold(op.energy_grad(op.extend(chi.values) + op.affine(chi.gradient)))


@dataclass(frozen=True)
class SymmetryReport:
    passed: bool
    asymmetry: float
    scale: float


def verify_symmetry(t: HomogenizedTensor, tol: float = 1e-8) -> SymmetryReport:
    scale = float(np.abs(t.matrix).max())
    asym = abs(t.k12 - t.k21)
    return SymmetryReport(asym <= tol * scale, asym, scale)


def cell_table(p: CellProblem2D, chi1: Corrector2D, chi2: Corrector2D) -> np.ndarray:
    """Rows ``(Y1, Y2, kappa, chi1, chi2)`` for every cell centre."""
    y1, y2 = p.grid.mesh()
    return np.column_stack([a.ravel() for a in (y1, y2, p.kappa, chi1.values, chi2.values)])


__all__ = [
    "CellProblem2D", "Corrector2D", "HomogenizedTensor", "SolverError", "SymmetryReport",
    "assemble_tensor", "cell_divergence", "cell_table", "cross_section_flux",
    "cross_section_fluxes", "flux_spread", "homogenize_cell", "solve_cell_2d", "verify_symmetry",
]
