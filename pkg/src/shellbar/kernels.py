"""Kernel dispatch: compiled extension when built, numpy fallback otherwise.

Set ``SHELLBAR_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("SHELLBAR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

basis_funs_ders = _impl.basis_funs_ders
shell_strain_operator = _impl.shell_strain_operator
add_btdc = _impl.add_btdc

__all__ = ["BACKEND", "basis_funs_ders", "shell_strain_operator", "add_btdc"]
