"""Kernel backend selection: numba-jitted hot loops with a pure-numpy fallback.

Every hot kernel in this package is written once as a plain Python/numpy
function and registered here.  When numba is importable and the backend is
"numba" (the default), callers get the jitted build; otherwise they get the
original function.  The backend is chosen from the ``GRIDGAME_BACKEND``
environment variable at import time ("numba" or "numpy") and can be switched
at runtime with :func:`set_backend`, which is what the benchmark harness and
the backend-parity tests do.

Kernels consume pre-drawn uniform arrays instead of calling an RNG, so both
backends produce bit-identical results for the same seed.
"""

from __future__ import annotations

import os
import warnings

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but degrade gracefully
    HAS_NUMBA = False

_VALID = ("numba", "numpy")

_backend = os.environ.get("GRIDGAME_BACKEND", "numba").strip().lower()
if _backend not in _VALID:
    warnings.warn(f"GRIDGAME_BACKEND={_backend!r} not recognized, using 'numba'")
    _backend = "numba"
if _backend == "numba" and not HAS_NUMBA:
    warnings.warn("numba unavailable, falling back to numpy kernels")
    _backend = "numpy"

_REGISTRY: dict[str, tuple] = {}


def active_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    """Switch kernel dispatch globally. Mainly for tests and benchmarks."""
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    _backend = name


def kernel(py_func):
    """Register a hot-loop function; returns a dispatcher honoring the backend.

    The jitted variant is compiled lazily on first call (numba caches the
    machine code on disk, so repeated processes skip recompilation).
    """
    jitted = njit(cache=True)(py_func) if HAS_NUMBA else None
    _REGISTRY[py_func.__name__] = (py_func, jitted)

    def dispatch(*args):
        impl = jitted if (_backend == "numba" and jitted is not None) else py_func
        return impl(*args)

    dispatch.__name__ = py_func.__name__
    dispatch.py_func = py_func
    dispatch.nb_func = jitted
    return dispatch


def registered_kernels() -> list[str]:
    return sorted(_REGISTRY)


def thread_count() -> int:
    """Worker cap for embarrassingly parallel surfaces (payoff cells, MC runs)."""
    raw = os.environ.get("GRIDGAME_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
