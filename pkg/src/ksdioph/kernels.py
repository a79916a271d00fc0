"""Backend dispatch for the hot scan kernels.

KSDIOPH_BACKEND=numpy forces the pure-numpy fallback; KSDIOPH_BACKEND=numba
requires numba.  Default is numba when importable, numpy otherwise.
benchmarks/bench_kernels.py compares the two.
"""

from __future__ import annotations

import os

from . import _kernels_numpy

_BACKEND_NAME = "numpy"
_BACKEND = _kernels_numpy

_requested = os.environ.get("KSDIOPH_BACKEND", "auto").lower()
if _requested not in ("numpy",):
    try:
        from . import _kernels_numba

        _BACKEND = _kernels_numba
        _BACKEND_NAME = "numba"
    except ImportError:
        if _requested == "numba":
            raise
if _requested == "numpy":
    _BACKEND = _kernels_numpy
    _BACKEND_NAME = "numpy"


def backend_name():
    return _BACKEND_NAME


def get_backend(name=None):
    if name in (None, "auto"):
        return _BACKEND
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba

        return _kernels_numba
    raise ValueError(f"unknown backend {name!r}")


def affine_min_scan(*args, **kw):
    return _BACKEND.affine_min_scan(*args, **kw)


def affine_collect_below(*args, **kw):
    return _BACKEND.affine_collect_below(*args, **kw)


def content_scan(*args, **kw):
    return _BACKEND.content_scan(*args, **kw)
