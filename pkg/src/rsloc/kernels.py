"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``RSLOC_PURE_PYTHON=1`` to force the numpy path.
"""
import os

from . import _pykernels

if os.environ.get("RSLOC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "numpy"

cast_rays = _impl.cast_rays
closeness_scores = _impl.closeness_scores
