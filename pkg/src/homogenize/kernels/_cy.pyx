# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled finite-volume stencil; same contract as ``_numpy.energy_grad``."""
import numpy as np


def energy_grad(const double[:, ::1] ue, const double[:, ::1] ax, const double[:, ::1] ay,
                axy, out=None):
    cdef Py_ssize_t P = ue.shape[0], Q = ue.shape[1]
    cdef Py_ssize_t p, q
    cdef double f, dxa, dxb, dya, dyb, c
    cdef bint cross = axy is not None
    cdef const double[:, ::1] a_xy
    if out is None:
        out = np.zeros((P, Q))
    cdef double[:, ::1] g = out
    g[:, :] = 0.0

    with nogil:
        for p in range(P - 1):
            for q in range(Q):
                f = ax[p, q] * (ue[p + 1, q] - ue[p, q])
                g[p + 1, q] += f
                g[p, q] -= f
        for p in range(P):
            for q in range(Q - 1):
                f = ay[p, q] * (ue[p, q + 1] - ue[p, q])
                g[p, q + 1] += f
                g[p, q] -= f
    if not cross:
        return out
    a_xy = axy
    with nogil:
        # vertex (p, q) sits between cells p, p+1 and q, q+1
        for p in range(P - 1):
            for q in range(Q - 1):
                c = a_xy[p, q]
                if c == 0.0:
                    continue
                dxa = ue[p + 1, q] - ue[p, q]
                dxb = ue[p + 1, q + 1] - ue[p, q + 1]
                dya = ue[p, q + 1] - ue[p, q]
                dyb = ue[p + 1, q + 1] - ue[p + 1, q]
                # d/dx-faces: 0.5 c dyv each; d/dy-faces: 0.5 c dxv each
                f = 0.25 * c * (dya + dyb)
                g[p + 1, q] += f
                g[p, q] -= f
                g[p + 1, q + 1] += f
                g[p, q + 1] -= f
                f = 0.25 * c * (dxa + dxb)
                g[p, q + 1] += f
                g[p, q] -= f
                g[p + 1, q + 1] += f
                g[p + 1, q] -= f
    return out
