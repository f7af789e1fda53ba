"""Kernel backend selection.

Two interchangeable implementations of the hot kernels exist: a compiled
Cython extension (``_kernels``) and a NumPy fallback (``pure``).  The
compiled one is preferred when importable; ``KERRPO_BACKEND=python`` or
``KERRPO_BACKEND=compiled`` forces the choice.  ``benchmarks/`` compares
the two.
"""

from __future__ import annotations

import os

from . import pure

try:
    from . import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

HAS_COMPILED = compiled is not None

_BACKENDS = {"python": pure}
if HAS_COMPILED:
    _BACKENDS["compiled"] = compiled


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def default_backend_name() -> str:
    env = os.environ.get("KERRPO_BACKEND")
    if env:
        if env not in _BACKENDS:
            raise ValueError(
                f"KERRPO_BACKEND={env!r} not available; choices: {sorted(_BACKENDS)}"
            )
        return env
    return "compiled" if HAS_COMPILED else "python"


def get_backend(name: str | None = None):
    """Return the kernel module to use; ``None`` selects the default."""
    if name is None:
        name = default_backend_name()
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choices: {sorted(_BACKENDS)}") from None
