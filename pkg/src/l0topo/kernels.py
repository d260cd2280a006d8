"""Cellwise kernels, compiled when the extension is built.

Set ``L0TOPO_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py
from ._kernels_py import BINARY, QUADRATIC_BOX

_names = ("p1_triplets", "pointwise_minimizer", "hbar", "topo_derivative", "box_residual")

if os.environ.get("L0TOPO_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

p1_triplets = _impl.p1_triplets
pointwise_minimizer = _impl.pointwise_minimizer
hbar = _impl.hbar
topo_derivative = _impl.topo_derivative
box_residual = _impl.box_residual

__all__ = ["BACKEND", "BINARY", "QUADRATIC_BOX", *_names]
