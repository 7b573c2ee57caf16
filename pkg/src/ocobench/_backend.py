"""Kernel backend selection.

Prefers the compiled extension; falls back to the numpy reference when the
extension is missing or ``OCOBENCH_PURE=1`` is set. Both backends export the
same four functions with identical semantics (see ``_kernels_py``).
"""

from __future__ import annotations

import os

if os.environ.get("OCOBENCH_PURE") == "1":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:  # no compiled extension in this environment
        from . import _kernels_py as kernels


def backend_name() -> str:
    """Name of the active trajectory-kernel backend."""
    return kernels.BACKEND_NAME
