"""Kernel backend selection.

The hot numeric kernels exist twice: a numba @njit loop implementation and a
vectorized pure-numpy implementation.  The environment variable
``FORCHFLOW_NUMBA`` picks the path:

* unset or ``1``/``auto``: use numba when importable, else fall back to numpy
* ``0``/``no``/``numpy``: force the pure-numpy path
* ``require``: fail loudly if numba is missing

``benchmarks/bench_kernels.py`` times both paths side by side.
"""

import os

_FLAG = os.environ.get("FORCHFLOW_NUMBA", "auto").strip().lower()

NUMBA_REQUESTED = _FLAG not in ("0", "no", "false", "numpy", "off")

if NUMBA_REQUESTED:
    try:
        import numba  # noqa: F401

        NUMBA_AVAILABLE = True
    except ImportError:
        NUMBA_AVAILABLE = False
        if _FLAG == "require":
            raise
else:
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_REQUESTED and NUMBA_AVAILABLE
