"""Point kernels: compiled extension when available, numpy fallback otherwise.

Set ``STRATA_LAB_FORCE_FALLBACK=1`` in the environment to skip the compiled
backend (used by the benchmark and by tests).
"""

from __future__ import annotations

import os

from . import fallback
from .packing import PackedCatalog, pack_components

_impl = fallback
BACKEND = "fallback"

if not os.environ.get("STRATA_LAB_FORCE_FALLBACK"):
    try:
        from . import _native  # compiled from _native.pyx; optional

        _impl = _native
        BACKEND = "native"
    except ImportError:
        pass


def backend_name() -> str:
    """Which kernel implementation was selected at import time."""
    return BACKEND


def assign_points(packed: PackedCatalog, points):
    """labels and q-weighted densities for a batch of points; see fallback."""
    return _impl.assign_points(packed, points)


__all__ = [
    "PackedCatalog",
    "pack_components",
    "assign_points",
    "backend_name",
    "BACKEND",
]
