"""
Hot per-pixel probe kernels with two interchangeable backends.

``numba``
    Compiled per-pixel loops (default when numba imports).
``numpy``
    Shifted-stack implementation, no compiler needed.

The backend is read from the ``LIPVESSEL_BACKEND`` environment variable at
import time and can be switched later with :func:`set_backend` or the
:func:`use_backend` context manager. Both produce bit-identical results.

Kernel contract
---------------
``f`` is a C-contiguous float64 image, ``valid`` a bool image of the same
shape, offsets are ``(n, 2)`` int64 arrays of ``(dx, dy)``. Samples that
fall outside the image or on an invalid pixel are skipped; a pixel with no
usable sample gets NaN.
"""

from __future__ import annotations

import contextlib
import logging
import os

import numpy as np

from . import _numpy

log = logging.getLogger(__name__)

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

_BACKENDS = {"numpy": _numpy}
if _numba is not None:
    _BACKENDS["numba"] = _numba

_active = None


def available_backends() -> list:
    return sorted(_BACKENDS)


def set_backend(name: str) -> None:
    global _active
    name = name.strip().lower()
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}")
    _active = name


def get_backend() -> str:
    return _active


@contextlib.contextmanager
def use_backend(name: str):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _prepare(f, valid, *offsets):
    f = np.ascontiguousarray(f, dtype=np.float64)
    valid = np.ascontiguousarray(valid, dtype=np.bool_)
    if valid.shape != f.shape:
        raise ValueError(f"valid mask shape {valid.shape} does not match image {f.shape}")
    offs = [np.ascontiguousarray(o, dtype=np.int64).reshape(-1, 2) for o in offsets]
    return f, valid, offs


def segment_rank(f, valid, offsets, discard_fraction):
    """Per-pixel ``floor(discard_fraction * n) + 1``-th smallest of ``f(x + h)``.

    ``n`` counts the usable samples at that pixel, so border pixels keep the
    same discard ratio on fewer points.
    """
    f, valid, (offsets,) = _prepare(f, valid, offsets)
    return _BACKENDS[_active].segment_rank(f, valid, offsets, discard_fraction)


def orientation_detector(f, valid, center, left, right, h_c, h_lr, discard_fraction):
    """Fused detector map of one rasterized probe; NaN off ``valid``."""
    f, valid, (center, left, right) = _prepare(f, valid, center, left, right)
    return _BACKENDS[_active].orientation_detector(
        f, valid, center, left, right, h_c, h_lr, discard_fraction
    )


_default = os.environ.get("LIPVESSEL_BACKEND", "numba" if _numba is not None else "numpy")
try:
    set_backend(_default)
except ValueError:
    log.warning("LIPVESSEL_BACKEND=%r unavailable, falling back to numpy", _default)
    set_backend("numpy")
