"""Backend selection for the enumeration kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``HDX_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy implementation is used.  ``BACKEND`` names the choice.
"""

from __future__ import annotations

import os

from . import _kernels_py

_force_pure = os.environ.get("HDX_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

coset_min_weight = _impl.coset_min_weight
star_search = _impl.star_search

__all__ = ["BACKEND", "coset_min_weight", "star_search"]
