"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when importable; otherwise the
pure-Python ``_pykernels`` module is used. Setting ``CHAINDIFF_PURE_PYTHON=1``
forces the fallback (useful for benchmarks and cross-checks).
"""
import os

from . import _pykernels

if os.environ.get("CHAINDIFF_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"

HIGH_GAIN = _pykernels.HIGH_GAIN
CHAIN_LINEAR = _pykernels.CHAIN_LINEAR
CHAIN_NONLINEAR = _pykernels.CHAIN_NONLINEAR
HYBRID = _pykernels.HYBRID
EULER = _pykernels.EULER
RK4 = _pykernels.RK4
KNOWN_BOUND = _pykernels.KNOWN_BOUND
ESTIMATED = _pykernels.ESTIMATED
DELAYED = _pykernels.DELAYED
FILTERED = _pykernels.FILTERED


def get_kernels(name=None):
    """Return a kernel module by name (``"cython"``/``"python"``) or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
