"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``CYCLECRF_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
kernels = _fallback

if os.environ.get("CYCLECRF_BACKEND", "").lower() not in ("python", "fallback"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        kernels = _kernels
        BACKEND = "compiled"


def get_kernels(name: str | None = None):
    """Kernel module by name (``"compiled"`` or ``"python"``), default active."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
