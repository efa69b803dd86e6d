"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when it is
missing. SIGHTLINE_KERNELS=python|cython forces a backend (cython raises if
the extension is absent).
"""

import os

_forced = os.environ.get("SIGHTLINE_KERNELS", "")
if _forced not in ("", "python", "cython"):
    raise RuntimeError(f"SIGHTLINE_KERNELS must be 'python' or 'cython', got {_forced!r}")

if _forced == "python":
    from . import py_impl as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        from . import py_impl as _impl

        BACKEND = "python"

BRANCH_START = _impl.BRANCH_START
BRANCH_END = _impl.BRANCH_END
BRANCH_INTERIOR = _impl.BRANCH_INTERIOR

segment_distances = _impl.segment_distances
polygon_distance = _impl.polygon_distance
polygon_contains = _impl.polygon_contains
polygon_contains_many = _impl.polygon_contains_many
raycast = _impl.raycast
hull_chain = _impl.hull_chain
