"""Kernel backend selection.

The compiled Cython core is preferred when importable; the pure-Python
reference backend is the fallback. ``SHOCKHASH_BACKEND=pure`` or
``SHOCKHASH_BACKEND=compiled`` forces a choice.
"""

import os

from . import _pure

_forced = os.environ.get("SHOCKHASH_BACKEND", "").lower()

_compiled = None
if _forced != "pure":
    try:
        from . import _core as _compiled
    except ImportError:
        _compiled = None
        if _forced == "compiled":
            raise

kernels = _compiled if _compiled is not None else _pure
BACKEND_NAME = kernels.NAME
HAS_COMPILED = _compiled is not None


def get_backend(name=None):
    """Return a kernel module by name ('pure' / 'compiled' / None=active)."""
    if name is None:
        return kernels
    if name == "pure":
        return _pure
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel backend is not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
