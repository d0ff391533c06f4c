"""Numba switch.

Hot lattice kernels exist twice: a ``@njit`` loop version and a vectorised
numpy version. Setting ``BNETLAB_DISABLE_NUMBA=1`` (or running without numba
installed) routes every call to the numpy path.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

_FLAG = "BNETLAB_DISABLE_NUMBA"


def numba_enabled() -> bool:
    if not HAVE_NUMBA:
        return False
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, cache=True, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap
