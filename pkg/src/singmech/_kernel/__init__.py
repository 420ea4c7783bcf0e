"""Numeric evaluation kernel with backend selection at import.

The compiled extension (``_ctape``) is preferred when present; the pure
Python interpreter is a drop-in replacement.  Set ``SINGMECH_PURE_PYTHON=1``
to force the fallback (used by the parity tests and the benchmark).
"""

from __future__ import annotations

import os

from . import pybackend

if os.environ.get("SINGMECH_PURE_PYTHON"):
    backend = pybackend
else:
    try:
        from . import _ctape as backend  # type: ignore[no-redef]
    except ImportError:
        backend = pybackend

BACKEND = backend.NAME

from . import tape  # noqa: E402
from .tape import Program, compile_exprs  # noqa: E402

__all__ = ["BACKEND", "Program", "backend", "compile_exprs", "pybackend", "tape"]
