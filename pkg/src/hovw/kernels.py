"""Backend selection for the hot kernels.

The compiled extension is used when importable; set ``HOVW_PURE_PYTHON=1`` to
force the pure-Python fallback.
"""

import os

from . import _kernels_py

if os.environ.get("HOVW_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

trace_outer_border = _impl.trace_outer_border
tree_distance = _impl.tree_distance
