"""
Logarithmic Image Processing arithmetic.

Grey levels live on the inverted LIP scale: 0 is white (no obstacle
between source and sensor) and ``M`` is black. Differences may be negative
and lie in ``]-inf, M[``, so everything here works on float64 and never
clamps to 8 bits.

All functions accept Python scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

import numpy as np

#: Upper bound of the grey scale for 8-bit digitised images.
M = 256.0

_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class LipDomainError(ValueError):
    """Raised when an operand leaves the open LIP range ``]-inf, M[``."""


def lip_add(a, b):
    """LIP addition ``a + b - a*b/M``.

    Commutative, associative, with 0 as neutral element. The result is
    below ``M`` whenever both operands are.
    """
    return a + b - a * b / M


def lip_sub(a, b):
    """LIP subtraction ``(a - b) / (1 - b/M)``.

    Inverse of :func:`lip_add`: ``lip_add(lip_sub(a, b), b) == a``. The result
    is negative when ``a < b``.

    Raises
    ------
    LipDomainError
        If any ``b >= M`` (the denominator would not be positive).
    """
    if np.any(np.asarray(b) >= M):
        raise LipDomainError(f"LIP subtrahend must be < {M:g}")
    return (a - b) / (1.0 - b / M)


def luminance(img: np.ndarray) -> np.ndarray:
    """Real-valued luminance ``0.299 R + 0.587 G + 0.114 B`` of an RGB image.

    Parameters
    ----------
    img : np.ndarray
        ``(H, W, 3)`` integer image with channels in ``[0, 255]``.

    Returns
    -------
    np.ndarray
        ``(H, W)`` float64 luminance, unrounded.
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) colour image, got shape {img.shape}")
    if img.size and (img.min() < 0 or img.max() > 255):
        raise ValueError("colour channels must lie in [0, 255]")
    # anchored on B so that a grey triple (v, v, v) maps to v exactly;
    # the plain weighted sum is off by one ulp for 65 of the 256 grey levels
    rgb = img.astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    return b + _LUMA_WEIGHTS[0] * (r - b) + _LUMA_WEIGHTS[1] * (g - b)


def complement(img):
    """Grey-scale complement ``(M - 1) - v``, mapping white to LIP zero."""
    return (M - 1.0) - np.asarray(img, dtype=np.float64)


def image_mean(img: np.ndarray, mask: np.ndarray) -> float:
    """Arithmetic mean of ``img`` over the pixels where ``mask`` is set."""
    img = np.asarray(img, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if img.shape != mask.shape:
        raise ValueError(f"mask shape {mask.shape} does not match image {img.shape}")
    if not mask.any():
        raise ValueError("cannot take the mean over an empty mask")
    return float(img[mask].mean())
