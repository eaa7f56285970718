"""Finite-volume stencil kernels.

The compiled Cython backend is used when it was built; otherwise the numpy
implementation is used.  Set ``HOMOGENIZE_BACKEND=python`` to force the
fallback.
"""
import os

from . import _numpy
from ._numpy import face_fluxes

try:
    if os.environ.get("HOMOGENIZE_BACKEND", "").lower() == "python":
        raise ImportError("compiled backend disabled by HOMOGENIZE_BACKEND")
    from . import _cy
except ImportError:
    _cy = None

BACKENDS = {"python": _numpy.energy_grad}
if _cy is not None:
    BACKENDS["cython"] = _cy.energy_grad

BACKEND = "cython" if _cy is not None else "python"
energy_grad = BACKENDS[BACKEND]

__all__ = ["BACKEND", "BACKENDS", "energy_grad", "face_fluxes"]
