"""Kernel selection: compiled extension when available, pure Python otherwise.

Set NEGFACT_PURE_KERNEL=1 to force the pure-Python kernel (used by the
benchmark and by tests that compare the two implementations).
"""

from __future__ import annotations

import os

from . import pykernel

KERNEL_KIND = "pure"
find_matches = pykernel.find_matches

if os.environ.get("NEGFACT_PURE_KERNEL") != "1":
    try:
        from . import _speedups  # type: ignore[attr-defined]

        find_matches = _speedups.find_matches
        KERNEL_KIND = "compiled"
    except ImportError:
        pass

__all__ = ["find_matches", "pykernel", "KERNEL_KIND"]
