"""JIT switch.

Hot kernels are compiled with numba when it is importable and the
environment variable ``HYBRIDCR_NUMBA`` is not set to ``0``. Otherwise the
pure-numpy implementations in :mod:`hybridcr.kernels` are used.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

NUMBA_AVAILABLE = numba is not None
NUMBA_ENABLED = NUMBA_AVAILABLE and os.environ.get("HYBRIDCR_NUMBA", "1") != "0"


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if not NUMBA_AVAILABLE:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
