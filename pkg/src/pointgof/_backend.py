"""Kernel backend selection.

The hot numeric kernels exist twice: a numba-JIT implementation and a
pure numpy/scipy one.  The active backend is chosen once at import time
from the ``POINTGOF_BACKEND`` environment variable:

* ``POINTGOF_BACKEND=numba``  -- require the JIT kernels (error if numba
  is missing),
* ``POINTGOF_BACKEND=numpy``  -- force the pure-numpy path,
* unset                       -- numba if importable, numpy otherwise.
"""

import os

_VALID = ("numba", "numpy")


def select_backend() -> str:
    choice = os.environ.get("POINTGOF_BACKEND", "").strip().lower()
    if choice and choice not in _VALID:
        raise ValueError(
            f"POINTGOF_BACKEND must be one of {_VALID}, got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise ImportError(
                "POINTGOF_BACKEND=numba requested but numba is not installed"
            )
        return "numpy"
    return "numba"


ACTIVE_BACKEND = select_backend()
