"""Selects the dual-ascent kernel at import time.

The compiled Cython kernel is used when available; otherwise (or when the
``PAPCBEAM_PURE_PYTHON=1`` environment variable is set) the numpy
implementation takes over.  Both implement the same iteration.
"""

import os

PURE_PYTHON_ENV = "PAPCBEAM_PURE_PYTHON"

if os.environ.get(PURE_PYTHON_ENV, "") == "1":
    from . import _dualcore_py as _kernel

    BACKEND = "python"
else:
    try:
        from . import _dualcore as _kernel  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _dualcore_py as _kernel

        BACKEND = "python"

solve_dual = _kernel.solve_dual
