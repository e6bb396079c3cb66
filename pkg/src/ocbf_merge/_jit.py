"""Numba switch.

Hot kernels are written once as plain loops and compiled with ``numba.njit``
when available. Setting ``OCBF_MERGE_DISABLE_NUMBA=1`` in the environment
selects the pure-numpy implementations instead (useful for debugging and for
platforms without llvmlite).
"""
import os

_FLAG = os.environ.get("OCBF_MERGE_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` in nopython mode, or return it untouched without numba."""
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
