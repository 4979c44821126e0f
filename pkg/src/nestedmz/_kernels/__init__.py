"""Kernel backend selection.

Two interchangeable implementations of the hot loops exist: a compiled
Cython extension and a portable NumPy one.  The compiled backend is
preferred when importable.  Set ``NESTEDMZ_KERNEL=portable`` or
``NESTEDMZ_KERNEL=compiled`` to force a choice (the latter raises if the
extension was not built).
"""

import os

from ._quadrature import QuadWeights, quadrature_weights

_choice = os.environ.get("NESTEDMZ_KERNEL", "auto")
if _choice not in {"auto", "compiled", "portable"}:
    raise ImportError(
        "NESTEDMZ_KERNEL must be one of auto/compiled/portable, got "
        f"{_choice!r}"
    )

if _choice == "portable":
    from . import _ref as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _ref as _impl  # type: ignore[no-redef]

BACKEND_NAME: str = _impl.BACKEND_NAME
profile = _impl.profile
dither_series = _impl.dither_series

__all__ = [
    "BACKEND_NAME",
    "QuadWeights",
    "quadrature_weights",
    "profile",
    "dither_series",
]
