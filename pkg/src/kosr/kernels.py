"""Backend selection for the hot kernels.

The compiled extension is preferred when importable; the pure-Python twin is
the fallback.  Set ``KOSR_FORCE_PURE=1`` to force the fallback (used by the
backend benchmark and by tests that cross-check the two implementations).
"""

from __future__ import annotations

import os

from . import _pykernels

_impl = _pykernels
if not os.environ.get("KOSR_FORCE_PURE"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled

BACKEND = _impl.BACKEND_NAME
INF = _pykernels.INF

build_label_arrays = _impl.build_label_arrays
dist_join = _impl.dist_join


def get_backend(name: str):
    """Return a specific kernel module by name, for side-by-side timing."""
    if name == "pure-python":
        return _pykernels
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["pure-python"]
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names
