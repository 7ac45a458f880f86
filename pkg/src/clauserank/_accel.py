"""Numba toggle for the numeric kernels.

CLAUSERANK_NUMBA=0 forces the pure-numpy fallbacks, CLAUSERANK_NUMBA=1 requires
numba (import error if absent), unset auto-detects. Read once at import; the
benchmark bypasses the switch and times both paths directly.
"""

import os

_FLAG = os.environ.get("CLAUSERANK_NUMBA", "").strip().lower()

if _FLAG in ("0", "false", "off", "no"):
    HAS_NUMBA = False
else:
    try:
        import numba  # noqa: F401

        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False
    if _FLAG in ("1", "true", "on", "yes") and not HAS_NUMBA:
        raise ImportError("CLAUSERANK_NUMBA=1 but numba is not importable")

USE_NUMBA = HAS_NUMBA


def jit_kernel(func):
    """@njit when numba is active, otherwise return the function untouched."""
    if HAS_NUMBA:
        from numba import njit

        return njit(cache=True)(func)
    return func
