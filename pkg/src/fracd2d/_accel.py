"""JIT dispatch for the hot numeric kernels.

Kernels are written once in plain numpy/python and compiled with numba's
``@njit`` when available.  Setting the environment variable
``FRACD2D_DISABLE_NUMBA=1`` (before import) forces the pure-numpy path,
which is bit-identical but slower; ``benchmarks/bench_kernels.py`` compares
the two.
"""

import os

NUMBA_DISABLED = os.environ.get("FRACD2D_DISABLE_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on",
)

if not NUMBA_DISABLED:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):
        """Identity decorator standing in for numba.njit."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap
