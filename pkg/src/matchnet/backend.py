"""Simulation kernel backend selection.

The per-round inner loops (recipient picking, sequential marriage
resolution) are compiled with numba when available.  The environment
variable ``MATCHNET_BACKEND`` overrides the choice:

* ``numba`` — require numba, fail hard if it cannot be imported;
* ``numpy`` — run the same kernel source uncompiled (pure
  Python/numpy); bit-identical results, since all randomness is drawn
  outside the kernels;
* ``auto`` (default) — numba if importable, numpy otherwise.

``benchmarks/backend_bench.py`` compares the two paths.
"""
from __future__ import annotations

import os

from .errors import ConfigurationError

_requested = os.environ.get("MATCHNET_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ConfigurationError(
        f"MATCHNET_BACKEND must be 'auto', 'numba' or 'numpy', "
        f"got {_requested!r}")

_numba = None
if _requested in ("auto", "numba"):
    try:
        import numba as _numba
    except ImportError:
        if _requested == "numba":
            raise ConfigurationError(
                "MATCHNET_BACKEND=numba but numba is not importable")
        _numba = None

ACTIVE: str = "numba" if _numba is not None else "numpy"


def jit(fn):
    """Compile ``fn`` under the numba backend; identity otherwise."""
    if _numba is not None:
        return _numba.njit(cache=True, nogil=True)(fn)
    return fn
