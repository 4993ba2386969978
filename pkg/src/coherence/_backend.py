"""Pick the compiled kernels when available, else the pure-Python ones.

Set ``COHERENCE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("COHERENCE_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"

project_simplex = kernels.project_simplex
separable_value_grad = kernels.separable_value_grad
spg_separable = kernels.spg_separable
