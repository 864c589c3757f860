"""Kernel dispatch: the compiled extension when built, else pure Python.

Set ``MIXCHAR_PURE_PYTHON=1`` to force the fallback.
"""

import os

from mixchar import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("MIXCHAR_PURE_PYTHON"):
    try:
        from mixchar import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

val_p_factorial = _impl.val_p_factorial
conv_trunc_mod = _impl.conv_trunc_mod
forward_differences = _impl.forward_differences

__all__ = ["BACKEND", "val_p_factorial", "conv_trunc_mod", "forward_differences"]
