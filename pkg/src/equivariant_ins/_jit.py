"""Backend selection for the hot simulation kernels.

Set ``EQUIVARIANT_INS_NO_JIT=1`` to run the identical kernel source as plain
numpy/Python. The choice is made once, at import.
"""

import os

_flag = os.environ.get("EQUIVARIANT_INS_NO_JIT", "").strip().lower()

if _flag in ("", "0", "false", "no"):
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        _njit = None
else:
    _njit = None

BACKEND = "numba" if _njit is not None else "numpy"


def jit(func):
    if _njit is None:
        return func
    return _njit(cache=True, nogil=True)(func)
