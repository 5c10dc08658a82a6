"""Optional numba acceleration.

Set ``PRUNEDP_DISABLE_JIT=1`` to run every kernel as plain Python/numpy.
"""
import logging
import os

DISABLE_JIT = os.environ.get("PRUNEDP_DISABLE_JIT", "0").lower() not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

JIT_ENABLED = numba is not None and not DISABLE_JIT


def njit(*args, **kwargs):
    """``numba.njit`` when available and enabled, identity otherwise."""
    if not JIT_ENABLED:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func

    logging.getLogger("numba").setLevel(logging.WARNING)
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)
