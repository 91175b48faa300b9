"""Backend selection for the hot numeric kernel.

The package ships two implementations of the batched Bessel evaluator:
a Cython extension (``_fastcore``) and a numpy fallback (``reference``).
The compiled one is picked when importable.  Set ``MFBM_BACKEND`` to
``compiled`` or ``reference`` to force a choice; forcing ``compiled``
raises if the extension was not built.
"""

from __future__ import annotations

import os

from . import reference

_choice = os.environ.get("MFBM_BACKEND", "auto").strip().lower() or "auto"
if _choice not in ("auto", "compiled", "reference"):
    raise ImportError(
        f"MFBM_BACKEND must be 'compiled' or 'reference', got {_choice!r}"
    )

if _choice == "reference":
    _impl = reference
    BACKEND = "reference"
else:
    try:
        from . import _fastcore as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = reference
        BACKEND = "reference"

bessel_many = _impl.bessel_many

__all__ = ["BACKEND", "bessel_many", "reference"]
