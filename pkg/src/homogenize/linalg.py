"""Finite-volume diffusion operators and the conjugate-gradient solver.

Both operators are written as ``A = G^T K G``: a linear extension of the cell
unknowns onto a ghost-padded array (periodic wrap, or mirror/antimirror
ghosts at the walls), followed by the stencil energy gradient and the
adjoint fold-back.  ``A`` is therefore symmetric by construction, including
the cross-derivative terms of tensor coefficients.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft

from . import kernels

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (relative residual {residual:.3e} after {iterations} iterations)")


@dataclass(frozen=True)
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float


def pcg(apply: Callable[[np.ndarray], np.ndarray], b: np.ndarray,
        precond: Callable[[np.ndarray], np.ndarray], tol: float, maxiter: int,
        project: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> CGResult:
    """Preconditioned conjugate gradients to ``||b - Ax|| <= tol ||b||``.

    ``project`` (if given) is applied to the right-hand side and every
    residual; use it to stay on the complement of a nullspace.
    """
    if project is not None:
        b = project(b)
    x = np.zeros_like(b)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return CGResult(x, 0, 0.0)
    r = b.copy()
    it = 0
    res = 1.0
    # the outer loop restarts from the true residual if the recurrence drifted
    while it < maxiter:
        z = precond(r)
        p = z.copy()
        rz = float(np.vdot(r, z))
        while it < maxiter:
            it += 1
            ap = apply(p)
            alpha = rz / float(np.vdot(p, ap))
            x += alpha * p
            r -= alpha * ap
            if project is not None:
                r = project(r)
            res = float(np.linalg.norm(r)) / bnorm
            if res <= tol:
                break
            z = precond(r)
            rz_new = float(np.vdot(r, z))
            p = z + (rz_new / rz) * p
            rz = rz_new
        r = b - apply(x)
        if project is not None:
            r = project(r)
        res = float(np.linalg.norm(r)) / bnorm
        if res <= tol:
            return CGResult(x, it, res)
        log.debug("cg restart at iteration %d, true residual %.3e", it, res)
    raise SolverError("conjugate gradient did not converge", res, it)


def harmonic_faces(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 2.0 * a * b / (a + b)


def _fold(ext: np.ndarray, idx: np.ndarray, sign: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(idx, weights=(ext.ravel() * sign), minlength=n)


class _GhostOperator:
    """Shared machinery: ``apply(u) = fold(energy_grad(extend(u)))``."""

    shape: tuple[int, int]
    ax: np.ndarray
    ay: np.ndarray
    axy: Optional[np.ndarray]

    def _setup_map(self, rows: np.ndarray, cols: np.ndarray, sign: np.ndarray) -> None:
        n1, n2 = self.shape
        self._idx = (rows[:, None] * n2 + cols[None, :]).ravel()
        self._sign = sign.ravel()
        self._ext_shape = (len(rows), len(cols))

    def extend(self, u: np.ndarray) -> np.ndarray:
        return (u.ravel()[self._idx] * self._sign).reshape(self._ext_shape)

    def energy_grad(self, ue: np.ndarray, backend: str | None = None) -> np.ndarray:
        fn = kernels.BACKENDS[backend] if backend else kernels.energy_grad
        return fn(ue, self.ax, self.ay, self.axy)

    def fold(self, gue: np.ndarray) -> np.ndarray:
        return _fold(gue, self._idx, self._sign, self.shape[0] * self.shape[1]).reshape(self.shape)

    def apply(self, u: np.ndarray, backend: str | None = None) -> np.ndarray:
        return self.fold(self.energy_grad(self.extend(u), backend))

    def fluxes(self, ue: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return kernels.face_fluxes(ue, self.ax, self.ay, self.axy)


class PeriodicOperator(_GhostOperator):
    """Periodic diffusion operator on an N x N cell grid of side L.

    ``a11``/``a22`` are harmonically averaged onto faces; ``a12`` (if given)
    is arithmetically averaged onto the cell vertices.
    """

    def __init__(self, a11: np.ndarray, a22: np.ndarray | None = None,
                 a12: np.ndarray | None = None, length: float = 1.0):
        a22 = a11 if a22 is None else a22
        n = a11.shape[0]
        if a11.shape != (n, n) or a22.shape != (n, n):
            raise ValueError("coefficients must be square N x N arrays")
        self.n = n
        self.shape = (n, n)
        self.length = float(length)
        self.h = self.length / n
        # face i of axis 0 is the left face of cell i (between i-1 and i)
        fx = harmonic_faces(np.roll(a11, 1, axis=0), a11)
        fy = harmonic_faces(np.roll(a22, 1, axis=1), a22)
        self.face_x, self.face_y = fx, fy
        ax = np.zeros((n + 1, n + 2))
        ax[:n, 1:n + 1] = fx
        ay = np.zeros((n + 2, n + 1))
        ay[1:n + 1, :n] = fy
        self.ax, self.ay = ax, ay
        if a12 is not None and np.any(a12 != 0):
            # vertex (p, q) is the lower-left corner of cell (p, q)
            v = 0.25 * (a12 + np.roll(a12, 1, 0) + np.roll(a12, 1, 1) + np.roll(a12, (1, 1), (0, 1)))
            axy = np.zeros((n + 1, n + 1))
            axy[:n, :n] = v
            self.axy = axy
        else:
            self.axy = None
        wrap = (np.arange(n + 2) - 1) % n
        self._setup_map(wrap, wrap, np.ones((n + 2, n + 2)))
        k = np.arange(n)
        lam = 2.0 - 2.0 * np.cos(2.0 * np.pi * k / n)
        c1, c2 = float(fx.mean()), float(fy.mean())
        eig = c1 * lam[:, None] + c2 * lam[None, : n // 2 + 1]
        eig[0, 0] = np.inf
        self._inv_eig = 1.0 / eig

    def affine(self, gradient: tuple[float, float]) -> np.ndarray:
        """Affine field ``g . Y`` on the extended grid (its differences are all that matter)."""
        p = np.arange(self.n + 2, dtype=float)
        return gradient[0] * self.h * p[:, None] + gradient[1] * self.h * p[None, :]

    def rhs(self, gradient: tuple[float, float]) -> np.ndarray:
        return -self.fold(self.energy_grad(self.affine(gradient)))

    def precondition(self, r: np.ndarray) -> np.ndarray:
        return sfft.irfft2(sfft.rfft2(r) * self._inv_eig, s=self.shape)

    @staticmethod
    def project(r: np.ndarray) -> np.ndarray:
        return r - r.mean()


class BoundedOperator(_GhostOperator):
    """Diffusion operator on the unit square, M x M cells.

    Walls: Dirichlet (zero) on X1 = 0 through an antisymmetric ghost at half
    weight; zero normal gradient elsewhere through mirror ghosts.  Cross
    terms are carried on interior vertices only.
    """

    def __init__(self, a11: np.ndarray, a22: np.ndarray | None = None,
                 a12: np.ndarray | None = None):
        a22 = a11 if a22 is None else a22
        m = a11.shape[0]
        if a11.shape != (m, m) or a22.shape != (m, m):
            raise ValueError("coefficients must be square M x M arrays")
        self.m = m
        self.shape = (m, m)
        self.h = 1.0 / m
        ax = np.zeros((m + 1, m + 2))
        ax[1:m, 1:m + 1] = harmonic_faces(a11[:-1], a11[1:])
        ax[0, 1:m + 1] = 0.5 * a11[0]  # ghost difference spans a full cell
        ay = np.zeros((m + 2, m + 1))
        ay[1:m + 1, 1:m] = harmonic_faces(a22[:, :-1], a22[:, 1:])
        self.ax, self.ay = ax, ay
        if a12 is not None and np.any(a12 != 0):
            axy = np.zeros((m + 1, m + 1))
            axy[1:m, 1:m] = 0.25 * (a12[:-1, :-1] + a12[1:, :-1] + a12[:-1, 1:] + a12[1:, 1:])
            self.axy = axy
        else:
            self.axy = None
        rows = np.concatenate([[0], np.arange(m), [m - 1]])
        cols = rows
        rsign = np.ones(m + 2)
        rsign[0] = -1.0
        self._setup_map(rows, cols, np.repeat(rsign[:, None], m + 2, axis=1))
        c1 = float(ax[1:m, 1:m + 1].mean()) if m > 1 else float(a11.mean())
        c2 = float(ay[1:m + 1, 1:m].mean()) if m > 1 else float(a22.mean())
        k = np.arange(m)
        lam_x = 2.0 - 2.0 * np.cos(np.pi * (2 * k + 1) / (2 * m))
        lam_y = 2.0 - 2.0 * np.cos(np.pi * k / m)
        self._inv_eig = 1.0 / (c1 * lam_x[:, None] + c2 * lam_y[None, :])

    def precondition(self, r: np.ndarray) -> np.ndarray:
        t = sfft.dct(sfft.dst(r, type=4, axis=0, norm="ortho"), type=2, axis=1, norm="ortho")
        t *= self._inv_eig
        return sfft.dst(sfft.idct(t, type=2, axis=1, norm="ortho"), type=4, axis=0, norm="ortho")
