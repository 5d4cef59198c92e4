"""
Reading and writing images, masks and float maps; dataset file pairing.
"""

from __future__ import annotations

import glob
import os
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np
from PIL import Image

TP_COLOR = (0, 0, 0)
TN_COLOR = (255, 255, 255)
FP_COLOR = (0, 255, 255)
FN_COLOR = (255, 0, 0)

DEFAULT_KEY_PATTERN = r"^(\d+)"


def read_color_image(path) -> np.ndarray:
    """Load an image as ``(H, W, 3)`` uint8 RGB; grey images are replicated."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def read_mask(path) -> np.ndarray:
    """Load a binary mask; any non-zero grey level is set."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L")) > 0


def write_mask_png(path, mask) -> None:
    """8-bit PNG with 0 for background and 255 for set pixels."""
    Image.fromarray(np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)).save(path)


def write_pfm(path, data) -> None:
    """Single-channel little-endian PFM (scale -1.0); NaN is kept as NaN."""
    data = np.asarray(data, dtype="<f4")
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        # PFM stores the bottom row first
        fh.write(np.ascontiguousarray(data[::-1]).tobytes())


def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        kind = fh.readline().strip()
        if kind not in (b"Pf", b"PF"):
            raise ValueError(f"{path}: not a PFM file")
        w, h = map(int, fh.readline().split())
        scale = float(fh.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        channels = 3 if kind == b"PF" else 1
        data = np.frombuffer(fh.read(), dtype=dtype, count=w * h * channels)
    shape = (h, w, 3) if channels == 3 else (h, w)
    return data.reshape(shape)[::-1].astype(np.float32)


def write_png16(path, data) -> tuple:
    """16-bit PNG of a float map with an affine quantization.

    Defined values map linearly onto ``[1, 65535]``, NaN onto 0. The range
    is written to ``<path>.txt`` as ``min``, ``max`` and ``undefined`` lines.

    Returns
    -------
    tuple
        ``(min, max)`` of the defined values.
    """
    data = np.asarray(data, dtype=np.float64)
    defined = ~np.isnan(data)
    lo = float(data[defined].min()) if defined.any() else 0.0
    hi = float(data[defined].max()) if defined.any() else 0.0
    span = hi - lo if hi > lo else 1.0
    q = np.zeros(data.shape, dtype=np.uint16)
    q[defined] = np.round(1 + (data[defined] - lo) / span * 65534).astype(np.uint16)
    Image.fromarray(q).save(path)
    with open(f"{path}.txt", "w") as fh:
        fh.write(f"min {lo!r}\nmax {hi!r}\nundefined 0\n")
    return lo, hi


def read_png16(path) -> np.ndarray:
    """Invert :func:`write_png16` using its sidecar file."""
    with Image.open(path) as im:
        q = np.asarray(im).astype(np.float64)
    meta = {}
    with open(f"{path}.txt") as fh:
        for line in fh:
            k, v = line.split()
            meta[k] = float(v)
    lo, hi = meta["min"], meta["max"]
    span = hi - lo if hi > lo else 1.0
    out = lo + (q - 1) / 65534 * span
    out[q == 0] = np.nan
    return out


def render_overlay(pred, ref, fov=None, base_image=None) -> np.ndarray:
    """Four-colour comparison image.

    True positives black, true negatives white, false positives cyan,
    false negatives red; pixels outside the FOV are white. ``base_image``
    only has to match in size.
    """
    pred = np.asarray(pred, dtype=bool)
    ref = np.asarray(ref, dtype=bool)
    fov = np.ones(pred.shape, dtype=bool) if fov is None else np.asarray(fov, dtype=bool)
    if not (pred.shape == ref.shape == fov.shape):
        raise ValueError(f"mask shapes differ: pred {pred.shape}, ref {ref.shape}, fov {fov.shape}")
    if base_image is not None and np.asarray(base_image).shape[:2] != pred.shape:
        raise ValueError("base image size does not match the masks")
    out = np.empty(pred.shape + (3,), dtype=np.uint8)
    out[...] = TN_COLOR
    out[pred & ref & fov] = TP_COLOR
    out[pred & ~ref & fov] = FP_COLOR
    out[~pred & ref & fov] = FN_COLOR
    return out


def save_rgb(path, rgb) -> None:
    Image.fromarray(np.asarray(rgb, dtype=np.uint8)).save(path)


@dataclass
class DatasetLayout:
    """Where a dataset's images, FOV masks and references live.

    Files from the different globs are paired by the key that
    ``key_pattern`` extracts from each file stem (first group, or the whole
    match). For DRIVE, ``01_test.tif``, ``01_test_mask.gif`` and
    ``01_manual1.gif`` all share the key ``01``.
    """

    image_glob: str
    fov_glob: Optional[str] = None
    reference_glob: Optional[str] = None
    fov_angle: float = 45.0
    key_pattern: str = DEFAULT_KEY_PATTERN

    def __post_init__(self):
        if self.fov_angle <= 0:
            raise ValueError(f"fov_angle must be positive, got {self.fov_angle}")

    def key(self, path) -> str:
        stem = os.path.splitext(os.path.basename(path))[0]
        m = re.search(self.key_pattern, stem)
        if m is None:
            raise ValueError(f"cannot extract a key from {stem!r} with {self.key_pattern!r}")
        return m.group(1) if m.groups() else m.group(0)

    def _index(self, pattern) -> dict:
        out = {}
        for p in sorted(glob.glob(os.path.expanduser(pattern))):
            k = self.key(p)
            if k in out:
                raise ValueError(f"key {k!r} matches both {out[k]} and {p}")
            out[k] = p
        return out

    def images(self) -> dict:
        return self._index(self.image_glob)

    def fovs(self) -> dict:
        return self._index(self.fov_glob) if self.fov_glob else {}

    def references(self) -> dict:
        return self._index(self.reference_glob) if self.reference_glob else {}


def read_config(path) -> dict:
    """Flat ``key = value`` config; ``#`` starts a comment, keys use dashes."""
    out = {}
    with open(path) as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected 'key = value'")
            k, v = line.split("=", 1)
            out[k.strip().replace("_", "-")] = v.strip()
    return out
