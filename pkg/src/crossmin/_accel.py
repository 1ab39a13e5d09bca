"""Numba switch.

Set ``CROSSMIN_DISABLE_NUMBA=1`` to force the pure-numpy kernels. Numba is
also skipped silently when it cannot be imported.
"""
import os

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func

        return decorator


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = NUMBA_AVAILABLE and not _flag("CROSSMIN_DISABLE_NUMBA")
