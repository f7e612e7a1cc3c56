"""Selects the compiled core when it is importable, the numpy fallback otherwise.

``WLFORGE_BACKEND=python`` forces the fallback; ``WLFORGE_BACKEND=compiled``
makes a missing extension an import error.
"""
import os

from . import _pycore

_choice = os.environ.get("WLFORGE_BACKEND", "auto").lower()

if _choice == "python":
    _impl = _pycore
else:
    try:
        from . import _core as _impl
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = _pycore

NAME = "compiled" if _impl is not _pycore else "python"
refine_ids = _impl.refine_ids
sorted_sum = _impl.sorted_sum


def workers() -> int:
    """Worker cap from ``WLFORGE_THREADS`` (default: CPU count)."""
    raw = os.environ.get("WLFORGE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1
