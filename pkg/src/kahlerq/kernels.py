"""Backend selection for the hot loops.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy fallback in ``_kernels_py``. Set ``KAHLERQ_PURE_PYTHON=1`` to force
the fallback.
"""
import os

from . import _kernels_py

try:
    if os.environ.get("KAHLERQ_PURE_PYTHON"):
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _kernels_py
    BACKEND = "python"

propagate_linear = _impl.propagate_linear
mode_poly_flow = _impl.mode_poly_flow
mode_poly_torus = _impl.mode_poly_torus
relation_search = _impl.relation_search


def backends():
    """Map of backend name to module, for benchmarks and cross-checks."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
