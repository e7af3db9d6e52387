"""Kernel backend selection.

The compiled extension is used when importable; set ``LLOYDFLOCK_PURE=1`` to
force the pure-Python kernels.
"""
import os

from . import _pykernels

if os.environ.get("LLOYDFLOCK_PURE") == "1":
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _pykernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND", "_pykernels"]
