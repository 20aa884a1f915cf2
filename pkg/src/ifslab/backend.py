"""Kernel backend selection.

The compiled Cython kernels are used when present; the numpy fallback is
selected otherwise.  Set IFSLAB_BACKEND=python or IFSLAB_BACKEND=compiled to
force a choice (forcing ``compiled`` raises if the extension is missing).
Both backends implement the same functions with identical rounding, so
results do not depend on the selection.
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("IFSLAB_BACKEND", "auto")

if _requested == "python":
    _impl = _kernels_py
elif _requested == "compiled":
    from . import _kernels as _impl  # noqa: F401  (ImportError is the point)
elif _requested == "auto":
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py
else:
    raise RuntimeError(
        f"IFSLAB_BACKEND must be 'auto', 'python' or 'compiled', got {_requested!r}")

transfer_apply = _impl.transfer_apply
segment_sums = _impl.segment_sums
BACKEND_NAME = _impl.BACKEND_NAME


def backend_name():
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return BACKEND_NAME
