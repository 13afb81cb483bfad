"""Pick the compiled kernels when available; SPECULAR_BACKEND=python forces the fallback."""
from __future__ import annotations

import os

from . import _fallback

kernels = _fallback
name = "python"

if os.environ.get("SPECULAR_BACKEND", "").lower() not in ("python", "numpy", "fallback"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        name = "cython"


def use(backend: str) -> None:
    """Switch backend at runtime ('cython' or 'python')."""
    global kernels, name
    if backend == "python":
        kernels, name = _fallback, "python"
    elif backend == "cython":
        from . import _kernels as _compiled
        kernels, name = _compiled, "cython"
    else:
        raise ValueError(f"unknown backend {backend!r}")
