"""JIT switch for the hot kernels.

Set ``LATINFILL_NUMBA=0`` to force the pure numpy/Python path. When numba is
missing the fallback is used automatically.
"""

import os

_flag = os.getenv("LATINFILL_NUMBA", "1").strip().lower()

try:
    import numba as _nb
except ImportError:  # pragma: no cover - numba is an optional speedup
    _nb = None

NUMBA_AVAILABLE = _nb is not None
USE_NUMBA = NUMBA_AVAILABLE and _flag not in ("0", "false", "no", "off")


def njit(func):
    """Compile ``func`` in nopython mode, or return it untouched without numba."""
    if not NUMBA_AVAILABLE:
        return func
    return _nb.njit(cache=True)(func)
