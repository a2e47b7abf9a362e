"""Backend selection for the oracle kernel.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``ROOFCUT_KERNEL=python`` is set, the numpy fallback
is used.  Both expose ``measure_value``, ``eval_batch`` and ``multistart``.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _kernel_py


def _load_compiled() -> ModuleType | None:
    try:
        from . import _kernel
    except ImportError:
        return None
    return _kernel


_compiled = _load_compiled()


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` ('compiled', 'python' or None=default)."""
    if name is None:
        name = os.environ.get("ROOFCUT_KERNEL", "compiled" if _compiled else "python")
    if name == "python":
        return _kernel_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


HAVE_COMPILED = _compiled is not None
backend = get_backend()
BACKEND = "compiled" if backend is not _kernel_py else "python"
