"""Kernel selection.

The compiled extension is used when importable; setting
``GAUSSCTL_PURE_PYTHON=1`` forces the pure-Python kernels.
"""
import os

from gaussctl import _pykernels as python_kernels

try:
    if os.environ.get("GAUSSCTL_PURE_PYTHON", "") == "1":
        raise ImportError("pure-Python kernels requested")
    from gaussctl import _ckernels as compiled_kernels
except ImportError:
    compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "cython" if compiled_kernels is not None else "python"

__all__ = ["kernels", "BACKEND", "compiled_kernels", "python_kernels"]
