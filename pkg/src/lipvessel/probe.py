"""
Three-segment probes: scale rules, rasterization and lighting adaptation.

A probe is three parallel digital segments of equal length ``l``. The
central one starts at the probe origin; the two side segments sit at
``w/2`` on either side of it. Offsets are ``(dx, dy)`` pairs with ``dx``
along image columns and ``dy`` along rows (downwards).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lip import M, lip_add, lip_sub

#: Reference FOV angle (degrees) the width rule is calibrated for.
REFERENCE_FOV_ANGLE = 45.0
#: Reference central / side intensities at the calibration operating point.
CENTER_REFERENCE = 215.0
SIDE_REFERENCE = 225.0

LENGTH_RATIO = 0.75
WIDTH_RATIOS = (1.0, 0.75, 0.5)


@dataclass(frozen=True)
class ProbeSpec:
    """Geometry and non-flat intensities of one probe scale."""

    width: float
    length: float
    center_intensity: float
    side_intensity: float

    def __post_init__(self):
        if not (self.width > 0 and self.length > 0):
            raise ValueError(f"probe width and length must be positive, got {self.width}, {self.length}")
        if not (self.center_intensity < M and self.side_intensity < M):
            raise ValueError(f"probe intensities must be < {M:g}")

    @classmethod
    def from_width(cls, width: float, center_intensity: float, side_intensity: float) -> "ProbeSpec":
        """Build a probe whose length follows the ``l = 0.75 w`` rule."""
        return cls(width, LENGTH_RATIO * width, center_intensity, side_intensity)


@dataclass(frozen=True)
class RasterProbe:
    """A probe rasterized at one orientation.

    Each segment is an ``(n, 2)`` int array of ``(dx, dy)`` offsets.
    """

    theta: float
    center: np.ndarray
    left: np.ndarray
    right: np.ndarray
    center_intensity: float
    side_intensity: float

    @property
    def segments(self):
        return (
            (self.center, self.center_intensity),
            (self.left, self.side_intensity),
            (self.right, self.side_intensity),
        )

    @property
    def reach(self) -> int:
        """Largest absolute offset component over all three segments."""
        return int(max(np.abs(s).max() for s in (self.center, self.left, self.right)))


@dataclass(frozen=True)
class ProbeFamily:
    """Probe scales (largest first) together with the orientation set."""

    probes: tuple
    orientations: tuple = field(default_factory=lambda: tuple(orientations(18)))

    def __post_init__(self):
        if not self.probes:
            raise ValueError("a probe family needs at least one probe")
        if not self.orientations:
            raise ValueError("a probe family needs at least one orientation")
        widths = [p.width for p in self.probes]
        if any(a <= b for a, b in zip(widths, widths[1:])):
            raise ValueError(f"probe widths must be strictly decreasing, got {widths}")

    def __len__(self):
        return len(self.probes)

    def rasterized(self, index: int) -> list:
        """All orientations of probe ``index`` as :class:`RasterProbe` objects."""
        return [rasterize(self.probes[index], t) for t in self.orientations]


def probe_widths(d_fov: float, fov_angle: float) -> tuple:
    """Widths ``(w1, w2, w3)`` for a FOV of diameter ``d_fov`` pixels.

    ``w1 = (d_fov / 50) * (45 / fov_angle)`` must exceed the calibre of the
    largest vessels; the two finer scales are 0.75 and 0.5 of it.
    """
    if d_fov <= 0 or fov_angle <= 0:
        raise ValueError(f"FOV diameter and angle must be positive, got {d_fov}, {fov_angle}")
    w1 = (d_fov / 50.0) * (REFERENCE_FOV_ANGLE / fov_angle)
    return tuple(r * w1 for r in WIDTH_RATIOS)


def probe_lengths(widths) -> tuple:
    return tuple(LENGTH_RATIO * w for w in widths)


def adapt_intensities(
    m_f: float,
    center_reference: float = CENTER_REFERENCE,
    side_reference: float = SIDE_REFERENCE,
) -> tuple:
    """Shift the reference probe intensities to the image's mean level.

    The central intensity becomes ``m_f`` and the side intensity receives the
    same LIP offset: ``side = side_reference (+) (m_f (-) center_reference)``.

    Returns
    -------
    tuple
        ``(center_intensity, side_intensity)``.
    """
    if not m_f < M:
        raise ValueError(f"image mean must be < {M:g}, got {m_f}")
    return float(m_f), float(lip_add(side_reference, lip_sub(m_f, center_reference)))


def orientations(n: int = 18) -> list:
    """``n`` angles (radians) equally spaced over the full circle from 0.

    The whole circle is needed since the probe origin sits at one end of the
    central segment, so ``theta`` and ``theta + pi`` are different probes.
    """
    if n < 1:
        raise ValueError(f"need at least one orientation, got {n}")
    return [math.radians(i * 360.0 / n) for i in range(n)]


def bresenham(x1: int, y1: int) -> np.ndarray:
    """Digital line from the origin to ``(x1, y1)``, endpoints included."""
    dx, dy = abs(x1), abs(y1)
    sx = 1 if x1 >= 0 else -1
    sy = 1 if y1 >= 0 else -1
    x = y = 0
    pts = [(0, 0)]
    if dx >= dy:
        err = dx // 2
        for _ in range(dx):
            x += sx
            err -= dy
            if err < 0:
                y += sy
                err += dx
            pts.append((x, y))
    else:
        err = dy // 2
        for _ in range(dy):
            y += sy
            err -= dx
            if err < 0:
                x += sx
                err += dy
            pts.append((x, y))
    return np.array(pts, dtype=np.int64)


def _round(v: float) -> int:
    # half-to-even keeps round(-v) == -round(v), which the 90 degree
    # rotation symmetry of the raster probes relies on
    return int(np.round(v))


def rasterize(spec: ProbeSpec, theta: float) -> RasterProbe:
    """Rasterize ``spec`` at orientation ``theta`` (radians).

    The central segment is the Bresenham line from ``(0, 0)`` to the rounded
    end point ``l (cos t, sin t)``. Side segments are that same digital line
    translated by the rounded normal ``(w/2) (-sin t, cos t)``: minus for the
    left one, plus for the right one. Translating one line (rather than
    drawing three) keeps the point counts equal.
    """
    if spec.length < 1:
        raise ValueError(f"probe length {spec.length} is below one pixel")
    c, s = math.cos(theta), math.sin(theta)
    center = bresenham(_round(spec.length * c), _round(spec.length * s))
    half = spec.width / 2.0
    normal = np.array([_round(-half * s), _round(half * c)], dtype=np.int64)
    if not normal.any():
        raise ValueError(f"probe width {spec.width} collapses to zero at theta={theta:.3f}")
    left, right = center - normal, center + normal
    sets = [set(map(tuple, a)) for a in (center, left, right)]
    if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
        raise ValueError(f"probe segments overlap for width {spec.width} at theta={theta:.3f}")
    return RasterProbe(theta, center, left, right, spec.center_intensity, spec.side_intensity)


def min_raster_width(width: float) -> int:
    """Left-to-right raster distance of an axis-aligned probe of ``width``."""
    return 2 * abs(_round(width / 2.0))


def build_family(
    d_fov: float,
    fov_angle: float,
    center_intensity: float,
    side_intensity: float,
    n_orientations: int = 18,
    max_probes: int = 3,
) -> ProbeFamily:
    """Multi-scale probe family for an image with the given FOV geometry.

    Scales whose raster width would fall below 2 pixels, or whose length
    is under one pixel, are dropped.
    """
    specs = []
    for w in probe_widths(d_fov, fov_angle)[:max_probes]:
        spec = ProbeSpec.from_width(w, center_intensity, side_intensity)
        if min_raster_width(w) < 2 or spec.length < 1:
            continue
        specs.append(spec)
    if not specs:
        raise ValueError(f"FOV diameter {d_fov:g} px is too small for any probe scale")
    return ProbeFamily(tuple(specs), tuple(orientations(n_orientations)))


def fov_diameter(mask: np.ndarray) -> float:
    """FOV diameter as the mean of the bounding-box width and height."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("FOV mask is empty")
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    height = rows[-1] - rows[0] + 1
    width = cols[-1] - cols[0] + 1
    return (width + height) / 2.0
