"""Numba acceleration shim.

Hot kernels are written as plain loops and compiled with numba when it is
available. Setting FDRELAY_PURE_NUMPY=1 forces the pure-numpy fallback path
(kernels run uncompiled, frame-level ops use vectorized numpy instead of the
per-symbol loop). `benchmarks/bench_kernels.py` times both paths.
"""
import os

_FORCE_NUMPY = os.environ.get("FDRELAY_PURE_NUMPY", "0") == "1"

try:
    import numba as _numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _FORCE_NUMPY


def njit(*args, **kwargs):
    """numba.njit when acceleration is on, identity decorator otherwise."""
    if USE_NUMBA:
        return _numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def passthrough(func):
        return func

    return passthrough
