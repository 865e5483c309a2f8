"""Numba switch.

Set ``SJJ_METROLOGY_DISABLE_NUMBA=1`` before import to route every hot kernel
through its numpy/scipy implementation instead of the jitted loops.
"""

import os

_FLAG = "SJJ_METROLOGY_DISABLE_NUMBA"


def _env_disabled():
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAVE_NUMBA = False

NUMBA_ENABLED = HAVE_NUMBA and not _env_disabled()


def njit(fn=None, **kwargs):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise.

    Kernels are compiled whenever numba exists, so both backends remain
    callable (and comparable) in one process regardless of the env flag.
    """
    kwargs.setdefault("cache", True)

    def wrap(f):
        return _numba.njit(**kwargs)(f) if HAVE_NUMBA else f

    return wrap(fn) if fn is not None else wrap


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
