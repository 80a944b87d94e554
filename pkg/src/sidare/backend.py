"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the pure
Python twin takes over.  Set ``SIDARE_BACKEND=python`` or
``SIDARE_BACKEND=compiled`` to force one explicitly (forcing the compiled
backend raises if the extension is missing, rather than silently degrading).
"""

from __future__ import annotations

import os

from . import _pykernels

_choice = os.environ.get("SIDARE_BACKEND", "").strip().lower()

if _choice in ("python", "pure", "py"):
    kernels = _pykernels
elif _choice in ("compiled", "cython", "c"):
    from . import _kernels as kernels  # noqa: F401
else:
    if _choice not in ("", "auto"):
        raise ImportError(
            f"unknown SIDARE_BACKEND value {_choice!r}; "
            "expected 'compiled', 'python', or 'auto'"
        )
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _pykernels

BACKEND = "compiled" if kernels.COMPILED else "python"

forward_sweep = kernels.forward_sweep
backward_sweep = kernels.backward_sweep
