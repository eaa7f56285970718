"""Pure-numpy finite-volume stencil (reference and fallback backend)."""
import numpy as np


def energy_grad(ue, ax, ay, axy, out=None):
    """Gradient of the discrete energy with respect to the extended field ``ue``.

    The energy is ``1/2 sum ax dx^2 + 1/2 sum ay dy^2 + sum axy dxv dyv`` where
    ``dx``/``dy`` are differences across faces normal to axis 0/1 and
    ``dxv``/``dyv`` are their averages at the vertices.  Shapes: ``ue`` (P, Q),
    ``ax`` (P-1, Q), ``ay`` (P, Q-1), ``axy`` (P-1, Q-1).
    """
    fx, fy = face_fluxes(ue, ax, ay, axy)
    if out is None:
        out = np.zeros_like(ue)
    else:
        out[...] = 0.0
    out[1:, :] += fx
    out[:-1, :] -= fx
    out[:, 1:] += fy
    out[:, :-1] -= fy
    return out


def face_fluxes(ue, ax, ay, axy):
    """Face fluxes (energy derivatives with respect to ``dx`` and ``dy``)."""
    dx = ue[1:, :] - ue[:-1, :]
    dy = ue[:, 1:] - ue[:, :-1]
    fx = ax * dx
    fy = ay * dy
    if axy is not None:
        dxv = 0.5 * (dx[:, :-1] + dx[:, 1:])
        dyv = 0.5 * (dy[:-1, :] + dy[1:, :])
        cx = 0.5 * axy * dyv
        cy = 0.5 * axy * dxv
        fx[:, :-1] += cx
        fx[:, 1:] += cx
        fy[:-1, :] += cy
        fy[1:, :] += cy
    return fx, fy
