"""Optional numba acceleration.

Hot kernels are written once as plain Python/numpy loops and compiled with
``numba.njit`` when available.  Setting ``MULTICONN_DISABLE_NUMBA=1`` in the
environment (before import) selects the pure-numpy code paths instead.
"""
import os

_FLAG = os.environ.get("MULTICONN_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG in ("1", "true", "yes", "on")

try:
    if DISABLED_BY_ENV:
        raise ImportError("numba disabled by MULTICONN_DISABLE_NUMBA")
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


USE_NUMBA = HAS_NUMBA
