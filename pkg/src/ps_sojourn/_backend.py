"""Kernel selection: the compiled extension when importable, else ``_fallback``.

Set ``PS_SOJOURN_BACKEND=python`` to force the fallback (``compiled`` makes a
missing extension an import error).
"""
from __future__ import annotations

import os

from . import _fallback

_choice = os.environ.get("PS_SOJOURN_BACKEND", "auto").lower()

if _choice == "python":
    kernels = _fallback
    NAME = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        NAME = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        kernels = _fallback
        NAME = "python"

__all__ = ["kernels", "NAME", "_fallback"]
