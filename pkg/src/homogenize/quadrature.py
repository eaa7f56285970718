"""Composite 5-point Gauss-Legendre quadrature with a doubling check."""
from __future__ import annotations

from typing import Callable

import numpy as np

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(5)

RTOL = 1e-10
MAX_DOUBLINGS = 12


class QuadratureError(RuntimeError):
    pass


def panel_points(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature points and weights for ``panels`` equal panels on [a, b].

    Returned arrays have shape ``(panels, 5)``.
    """
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    return mid + half * _NODES, half * _WEIGHTS


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int) -> np.ndarray:
    """Integrate ``f`` over [a, b]; ``f`` maps an array of points (last axis) to values.

    ``f`` may return extra leading axes (e.g. one row per slow point); the
    result then has those leading axes.
    """
    x, w = panel_points(a, b, panels)
    vals = np.asarray(f(x.ravel()))
    vals = vals.reshape(vals.shape[:-1] + x.shape)
    return np.einsum("...pk,pk->...", vals, w)


def integrate_checked(f, a: float, b: float, panels: int,
                      rtol: float = RTOL) -> tuple[np.ndarray, int]:
    """Integrate with panel doubling until successive results agree to ``rtol``."""
    prev = integrate(f, a, b, panels)
    for _ in range(MAX_DOUBLINGS):
        panels *= 2
        cur = integrate(f, a, b, panels)
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur)):
            return cur, panels
        prev = cur
    raise QuadratureError(f"quadrature did not reach relative {rtol} with {panels} panels")


def cumulative(f, nodes: np.ndarray, panels_per_interval: int) -> np.ndarray:
    """Running integral of ``f`` from ``nodes[0]`` to every node."""
    m = panels_per_interval
    nodes = np.asarray(nodes, dtype=float)
    frac = np.arange(m) / m
    edges = (nodes[:-1, None] + np.diff(nodes)[:, None] * frac).ravel()
    edges = np.append(edges, nodes[-1])
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    x = mid + half * _NODES
    vals = np.asarray(f(x.ravel())).reshape(x.shape)
    per_panel = (vals * (half * _WEIGHTS)).sum(axis=1)
    per_interval = per_panel.reshape(len(nodes) - 1, m).sum(axis=1)
    return np.concatenate([[0.0], np.cumsum(per_interval)])


def cumulative_checked(f, nodes: np.ndarray, min_panels: int,
                       rtol: float = RTOL) -> np.ndarray:
    """Running integral with the doubling check applied to the total."""
    m = max(1, -(-min_panels // (len(nodes) - 1)))
    prev = cumulative(f, nodes, m)
    for _ in range(MAX_DOUBLINGS):
        m *= 2
        cur = cumulative(f, nodes, m)
        scale = np.max(np.abs(cur))
        if np.max(np.abs(cur - prev)) <= rtol * max(scale, np.finfo(float).tiny):
            return cur
        prev = cur
    raise QuadratureError(f"running integral did not reach relative {rtol}")
