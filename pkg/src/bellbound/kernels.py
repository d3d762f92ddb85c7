"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``BELLBOUND_PURE=1`` to force the fallback (tests and the benchmark do).
"""

import os

from . import _pykernels

BACKEND = "python"
if not os.environ.get("BELLBOUND_PURE"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

jacobi_eigh = _impl.jacobi_eigh
lhv_extrema = _impl.lhv_extrema

__all__ = ["BACKEND", "jacobi_eigh", "lhv_extrema"]
