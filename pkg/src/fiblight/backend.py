"""Kernel backend selection.

The compiled extension (``fiblight._core``) is preferred; the numpy
fallback (``fiblight._pure``) is used when the extension is missing or
when ``FIBLIGHT_BACKEND=pure`` is set. Both expose the same functions:
``sf_points``, ``inverse_nearest_batch``, ``neighbors_batch``,
``stream_keys``, ``draw_uniform``, ``trace_radiance``, ``render_pixels``.
"""

import os

_requested = os.environ.get("FIBLIGHT_BACKEND", "").strip().lower()

if _requested == "pure":
    from . import _pure as kernels
elif _requested == "compiled":
    from . import _core as kernels  # noqa: F401  (ImportError is the contract)
else:
    try:
        from . import _core as kernels
    except ImportError:
        from . import _pure as kernels

BACKEND = kernels.BACKEND_NAME


def get_backend(name=None):
    """Explicit backend lookup, mainly for the backend benchmark."""
    if name in (None, ""):
        return kernels
    if name == "pure":
        from . import _pure
        return _pure
    if name == "compiled":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")
