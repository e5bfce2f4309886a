"""Select the compiled kernels when available.

Set ``QCORR_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

from . import _pykernels

if os.environ.get("QCORR_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

cond_entropy = _impl.cond_entropy
cond_entropy_grid = _impl.cond_entropy_grid
free_evolve = _impl.free_evolve
