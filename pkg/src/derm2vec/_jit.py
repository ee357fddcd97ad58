"""Backend switch for the compiled kernels.

``DERM2VEC_BACKEND=numpy`` forces the pure-numpy paths; the default is
``numba`` whenever it imports. The choice is made once, at import time.
"""

import os

_requested = os.environ.get("DERM2VEC_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"DERM2VEC_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _requested == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(fn):
    """Compile ``fn`` in nopython mode when numba is present, else return it as is."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)
