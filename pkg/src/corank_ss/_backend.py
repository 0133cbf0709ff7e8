"""Select the elimination kernel at import time.

The compiled ``_kernel`` extension is used when it imports; otherwise the
pure-Python ``_kernel_py`` is used.  Setting ``CORANK_SS_PURE_PYTHON=1`` forces
the fallback (tests and the benchmark use this to exercise both paths).
"""
from __future__ import annotations

import os

from . import _kernel_py

if os.environ.get("CORANK_SS_PURE_PYTHON", "") not in ("", "0"):
    kernel = _kernel_py
    NAME = "python"
else:
    try:
        from . import _kernel as kernel  # type: ignore[attr-defined]

        NAME = "cython"
    except ImportError:
        kernel = _kernel_py
        NAME = "python"

echelon = kernel.echelon
rank = kernel.rank
rref = kernel.rref
