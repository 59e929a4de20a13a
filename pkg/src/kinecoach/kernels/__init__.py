"""Hot numeric kernels: compiled core with a pure-NumPy fallback.

The compiled extension is preferred when it built; otherwise the NumPy
implementations are used transparently. ``KINECOACH_KERNELS=python``
forces the fallback, ``KINECOACH_KERNELS=compiled`` demands the
extension (raising if it is unavailable). ``benchmarks/bench_kernels.py``
compares the two.
"""

import os

from . import numpy_backend

_choice = os.environ.get("KINECOACH_KERNELS", "").strip().lower()

if _choice in ("python", "numpy", "py"):
    _impl = numpy_backend
elif _choice in ("compiled", "cython", "c"):
    from . import _ckernels as _impl
elif _choice:
    raise ValueError(f"unknown KINECOACH_KERNELS value {_choice!r}")
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = numpy_backend

central_diff = _impl.central_diff
angle_series = _impl.angle_series
unwrap_angles = _impl.unwrap_angles
fill_gaps = _impl.fill_gaps
DEGENERATE_NORM = numpy_backend.DEGENERATE_NORM


def backend_name():
    """Name of the active kernel backend: "compiled" or "numpy"."""
    return "numpy" if _impl is numpy_backend else "compiled"


def available_backends():
    """Importable backends keyed by name (for parity tests/benchmarks)."""
    backends = {"numpy": numpy_backend}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        backends["compiled"] = _ckernels
    return backends
