"""Backend selection for the path propagator.

The compiled extension is preferred when it imported cleanly; otherwise the
pure-Python twin is used.  Both expose the same ``propagate_segment`` contract
and the same ``StepUnderflow`` failure mode, so callers never need to know
which one is active.
"""

from __future__ import annotations

try:  # pragma: no cover - exercised only when the extension is built
    from . import _dp45_cy as _impl

    BACKEND = "cython"
except ImportError:  # pragma: no cover
    from . import _dp45_py as _impl

    BACKEND = "python"

StepUnderflow = _impl.StepUnderflow
propagate_segment = _impl.propagate_segment


def backend_name():
    """Name of the active propagator backend: ``"cython"`` or ``"python"``."""
    return BACKEND
