"""
Synthetic fundus phantoms with known vessel ground truth.

Used by the test-suite and the benchmark; nothing here is needed to
segment real images.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


@dataclass
class Phantom:
    rgb: np.ndarray     # (H, W, 3) uint8
    fov: np.ndarray     # (H, W) bool
    vessels: np.ndarray  # (H, W) bool ground truth


def _draw_tree(shape, rng, n_trunks, max_width):
    h, w = shape
    cy, cx = h / 2.0, w / 2.0
    radius = 0.45 * min(h, w)
    segments = []  # (points, width)

    def grow(y, x, angle, width, length, depth):
        pts = []
        for _ in range(int(length)):
            pts.append((y, x))
            angle += rng.normal(0.0, 0.06)
            y += np.sin(angle)
            x += np.cos(angle)
            if (y - cy) ** 2 + (x - cx) ** 2 > radius ** 2:
                break
        if len(pts) > 2:
            segments.append((np.array(pts), width))
        if depth > 0 and width > 1.4 and len(pts) > 10:
            for sign in (-1, 1):
                k = rng.integers(len(pts) // 3, len(pts))
                by, bx = pts[k]
                grow(by, bx, angle + sign * rng.uniform(0.4, 0.9), width * 0.7, length * 0.6, depth - 1)

    # optic-disc-like source slightly off centre, trunks radiating out
    oy, ox = cy + rng.uniform(-0.1, 0.1) * h, cx - 0.25 * w
    for i in range(n_trunks):
        a = 2 * np.pi * i / n_trunks + rng.uniform(-0.3, 0.3)
        grow(oy, ox, a, max_width, radius * 1.6, 3)
    return segments


def fundus_phantom(
    size: int = 128,
    n_trunks: int = 4,
    max_width: float = None,
    contrast: float = 45.0,
    brightness: float = 150.0,
    vignetting: float = 0.35,
    noise: float = 2.0,
    seed: int = 0,
) -> Phantom:
    """Dark branching vessels on a bright, unevenly lit retinal disc.

    ``contrast`` is the darkening (grey levels, at full illumination) at a
    vessel centre; ``vignetting`` dims the rim relative to the centre.
    """
    rng = np.random.default_rng(seed)
    h = w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    r = np.hypot(yy - cy, xx - cx)
    radius = 0.45 * size
    fov = r <= radius
    if max_width is None:
        max_width = max(2.0, 2 * radius / 50.0 * 0.9)

    depth = np.zeros((h, w))
    truth = np.zeros((h, w), dtype=bool)
    for pts, width in _draw_tree((h, w), rng, n_trunks, max_width):
        line = np.zeros((h, w), dtype=bool)
        # dense sampling so the raster centreline has no gaps
        iy = np.clip(np.round(pts[:, 0]).astype(int), 0, h - 1)
        ix = np.clip(np.round(pts[:, 1]).astype(int), 0, w - 1)
        line[iy, ix] = True
        dist = ndimage.distance_transform_edt(~line)
        half = width / 2.0
        depth = np.maximum(depth, np.exp(-0.5 * (dist / max(half, 0.5)) ** 2) * min(1.0, width / 2.5))
        truth |= dist <= half

    illum = 1.0 - vignetting * (r / radius) ** 2
    lum = brightness * illum * (1.0 - contrast / brightness * depth)
    lum += rng.normal(0.0, noise, size=lum.shape)
    lum = np.where(fov, lum, 3.0)
    lum = np.clip(np.round(lum), 0, 255)
    # reddish fundus colours; luminance is preserved up to rounding
    rgb = np.stack([np.clip(lum * 1.3, 0, 255), lum, np.clip(lum * 0.5, 0, 255)], axis=-1)
    return Phantom(rgb.astype(np.uint8), fov, truth & fov)
