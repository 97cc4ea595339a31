"""Selects the compiled fixed-point kernel when available.

Set ``QSD_PURE_PYTHON=1`` to force the NumPy implementation.
"""

import os

from . import _fallback

fallback_kernel = _fallback.run_fixed_point
compiled_kernel = None

try:
    from ._kernels import run_fixed_point as compiled_kernel
except ImportError:  # extension not built
    compiled_kernel = None

if compiled_kernel is not None and os.environ.get("QSD_PURE_PYTHON", "") not in ("", "0"):
    run_fixed_point = fallback_kernel
    BACKEND = "python"
elif compiled_kernel is not None:
    run_fixed_point = compiled_kernel
    BACKEND = "compiled"
else:
    run_fixed_point = fallback_kernel
    BACKEND = "python"
