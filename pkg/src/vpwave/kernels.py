"""Kernel backend selection.

The compiled core (``vpwave._ckernels``) is used when it imports; otherwise the
numpy implementation in ``vpwave._pykernels`` is used.  Setting
``VPWAVE_PURE_PYTHON=1`` forces the fallback.
"""
import os

from vpwave import _pykernels

python_backend = _pykernels

compiled_backend = None
if os.environ.get("VPWAVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from vpwave import _ckernels as compiled_backend
    except ImportError:  # pragma: no cover - depends on the build
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

j0 = backend.j0
poly_dd = backend.poly_dd
frobenius_start = backend.frobenius_start
shoot = backend.shoot


def available_backends():
    """Map of backend name to module, for tests and benchmarks."""
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["cython"] = compiled_backend
    return out
