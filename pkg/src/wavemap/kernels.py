"""Backend selection for the hot kernels.

The compiled extension ``wavemap._ckernels`` is used when importable,
otherwise the NumPy fallback. Setting ``WAVEMAP_BACKEND=python`` forces the
fallback. Callers go through this module's attributes (``kernels.laplacian3``)
so that :func:`set_backend` takes effect everywhere.
"""
import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

_EXPORTS = ("gradient", "laplacian", "laplacian3", "rattle_position", "rattle_velocity")

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKEND = None


def available_backends():
    return ["python"] + (["cython"] if _ckernels is not None else [])


def set_backend(name):
    """Bind the kernel functions to backend ``name`` ("cython" or "python")."""
    global BACKEND
    if name == "cython":
        if _ckernels is None:
            raise ValueError("compiled kernels are not built; run `pip install -e .`")
        mod = _ckernels
    elif name == "python":
        mod = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")
    g = globals()
    for fn in _EXPORTS:
        g[fn] = getattr(mod, fn)
    BACKEND = name
    return name


def _default_backend():
    forced = os.environ.get("WAVEMAP_BACKEND", "").strip().lower()
    if forced:
        return forced
    return "cython" if _ckernels is not None else "python"


set_backend(_default_backend())
if BACKEND == "python" and _ckernels is None:
    log.debug("compiled kernels unavailable, using NumPy fallback")
