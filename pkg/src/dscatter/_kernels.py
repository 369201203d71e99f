"""Backend selection for the hot kernels.

The compiled extension is preferred when importable; ``DSCATTER_BACKEND``
forces the choice (``compiled`` or ``pure``).
"""

from __future__ import annotations

import os

_requested = os.environ.get("DSCATTER_BACKEND", "auto").lower()

if _requested not in ("auto", "compiled", "pure"):
    raise ValueError(f"DSCATTER_BACKEND must be auto|compiled|pure, got {_requested!r}")

if _requested == "pure":
    from . import _kernels_pure as _impl
    BACKEND = "pure"
else:
    try:
        from . import _fastkern as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _kernels_pure as _impl
        BACKEND = "pure"

fill_tk_source = _impl.fill_tk_source
pair_sum = _impl.pair_sum


def backend_name() -> str:
    return BACKEND
