"""Trimming kernel selection: compiled extension when available, else pure Python.

Set FLEXRSA_PURE_PYTHON=1 to force the fallback (used by the parity tests and
the kernel benchmark).
"""

from __future__ import annotations

import os

from . import _trimcore_py

if os.environ.get("FLEXRSA_PURE_PYTHON"):
    trim_demand_scan = _trimcore_py.trim_demand_scan
    KERNEL_BACKEND = "pure-python (forced)"
else:
    try:
        from . import _trimcore  # type: ignore[attr-defined]

        trim_demand_scan = _trimcore.trim_demand_scan
        KERNEL_BACKEND = "compiled"
    except ImportError:
        trim_demand_scan = _trimcore_py.trim_demand_scan
        KERNEL_BACKEND = "pure-python"


def available_kernels() -> dict:
    """All importable kernel implementations, keyed by name."""
    impls = {"pure-python": _trimcore_py.trim_demand_scan}
    try:
        from . import _trimcore  # type: ignore[attr-defined]

        impls["compiled"] = _trimcore.trim_demand_scan
    except ImportError:
        pass
    return impls
