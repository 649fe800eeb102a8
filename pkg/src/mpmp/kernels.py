"""Backend selection for the port-objective kernel.

Prefers the compiled extension when importable; falls back to the NumPy
implementation otherwise.  Set ``MPMP_PURE_PYTHON=1`` to force the fallback
(used by the parity tests and the benchmark).
"""
from __future__ import annotations

import os

from . import _portgrid_py

if os.environ.get("MPMP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _portgrid_py
    BACKEND = "python"
else:
    try:
        from . import _portgrid as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _portgrid_py
        BACKEND = "python"

objective_grid = _impl.objective_grid
objective_grid_py = _portgrid_py.objective_grid


def backend() -> str:
    return BACKEND
