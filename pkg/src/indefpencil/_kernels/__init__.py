"""Scalar kernels with a compiled core and a pure-Python fallback.

The compiled extension is used when it imports; setting the environment
variable ``INDEFPENCIL_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _fallback

if os.environ.get("INDEFPENCIL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _fallback

BACKEND = "compiled" if _impl is not _fallback else "python"

sturm_count = _impl.sturm_count
tridiag_eigvalsh = _impl.tridiag_eigvalsh
matching_residual = _impl.matching_residual
shooting_bisect = _impl.shooting_bisect

__all__ = [
    "BACKEND",
    "sturm_count",
    "tridiag_eigvalsh",
    "matching_residual",
    "shooting_bisect",
]
