"""Backend selection for the hot kernels.

Set ``REBITSIM_BACKEND=numpy`` to force the pure-numpy code paths. The
default is ``numba`` whenever numba imports cleanly.
"""

from __future__ import annotations

import os

ENV_VAR = "REBITSIM_BACKEND"

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def _initial_backend() -> str:
    requested = os.environ.get(ENV_VAR, "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not HAVE_NUMBA:
        return "numpy"
    return requested


_current = _initial_backend()


def get_backend() -> str:
    return _current


def set_backend(name: str) -> None:
    """Switch backends at runtime (used by the benchmark and tests)."""
    global _current
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    _current = name


def use_numba() -> bool:
    return _current == "numba"
