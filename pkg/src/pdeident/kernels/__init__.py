"""Kernel backend selection.

The compiled extension is preferred when importable; the NumPy fallback is
always available.  Set PDEIDENT_PURE=1 in the environment to force the
fallback (useful for benchmarking and debugging).
"""

from __future__ import annotations

import importlib
import os

from . import pure


def _load_backend():
    forced = os.environ.get("PDEIDENT_PURE", "").strip()
    if forced not in ("", "0"):
        return pure
    try:
        return importlib.import_module("pdeident.kernels._native")
    except ImportError:
        return pure


_impl = _load_backend()

BACKEND: str = _impl.BACKEND_NAME
correlate_axis = _impl.correlate_axis
singular_values = _impl.singular_values
two_column_singular_values = _impl.two_column_singular_values


def available_backends() -> tuple[str, ...]:
    """Names of importable backends on this installation."""
    names = ["pure"]
    try:
        importlib.import_module("pdeident.kernels._native")
        names.insert(0, "native")
    except ImportError:
        pass
    return tuple(names)


def get_backend(name: str):
    """Fetch a backend module by name ("native" or "pure")."""
    if name == "pure":
        return pure
    if name == "native":
        return importlib.import_module("pdeident.kernels._native")
    raise KeyError(f"unknown backend {name!r}")
