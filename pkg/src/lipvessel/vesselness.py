"""
Vesselness maps from probing the image surface from below.

For a rasterized probe the *contact map* at ``x`` is the largest LIP
constant that keeps the probe under the image: the exact minimum of
``f(x+h) (-) b(h)`` over the central segment, combined by minimum with
robust (rank) minima over the side segments. Each side's *detector* is its
own robust minimum LIP-minus the contact level; the orientation map keeps
the larger of the two. Taking the minimum over orientations, then over
probe scales, gives the vesselness map, in which vessels are valleys.

Maps are float64 arrays; NaN marks pixels where a map is undefined
(outside the FOV, or no usable sample under a segment).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .lip import lip_sub
from .probe import ProbeFamily, ProbeSpec, RasterProbe, orientations, rasterize

DEFAULT_DISCARD_FRACTION = 0.20


@dataclass(frozen=True)
class DetectorParams:
    discard_fraction: float = DEFAULT_DISCARD_FRACTION
    orientations: tuple = field(default_factory=lambda: tuple(orientations(18)))

    def __post_init__(self):
        if not 0.0 <= self.discard_fraction < 1.0:
            raise ValueError(f"discard_fraction must lie in [0, 1), got {self.discard_fraction}")
        if not self.orientations:
            raise ValueError("need at least one orientation")


@dataclass
class VesselnessMap:
    """A real-valued map restricted to a FOV.

    ``data`` holds NaN wherever the map is undefined.
    """

    data: np.ndarray
    fov: np.ndarray
    probes_used: int = 1

    @property
    def defined(self) -> np.ndarray:
        return self.fov & ~np.isnan(self.data)

    @property
    def shape(self):
        return self.data.shape

    def values(self) -> np.ndarray:
        """Defined values, in row-major order."""
        return self.data[self.defined]


def rank_index(n: int, discard_fraction: float) -> int:
    """Zero-based index of the robust minimum in a sorted set of ``n`` values."""
    return int(math.floor(discard_fraction * n))


def kth_min(values, discard_fraction: float = DEFAULT_DISCARD_FRACTION) -> float:
    """Robust minimum: the ``floor(discard_fraction * n) + 1``-th smallest value.

    A ``discard_fraction`` of 0 returns the exact minimum.

    >>> kth_min(range(1, 11), 0.2)
    3
    """
    values = sorted(values)
    if not values:
        raise ValueError("kth_min of an empty set")
    return values[rank_index(len(values), discard_fraction)]


def _valid_or_full(f, valid):
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {f.shape}")
    if valid is None:
        return f, np.ones(f.shape, dtype=bool)
    return f, np.asarray(valid, dtype=bool)


def constant_map(f, offsets, intensity, discard_fraction=0.0, valid=None) -> np.ndarray:
    """Robust minimum of ``f(x+h) (-) intensity`` over one segment."""
    f, valid = _valid_or_full(f, valid)
    # lip_sub is non-decreasing, so ranking raw grey levels first picks the same sample
    return lip_sub(kernels.segment_rank(f, valid, offsets, discard_fraction), intensity)


def grave_constant_map(f, probe: RasterProbe, discard_fraction=DEFAULT_DISCARD_FRACTION, valid=None) -> np.ndarray:
    """Contact level of the whole probe.

    Exact minimum on the central segment (it has to fit fully inside the
    vessel relief), robust minima on the side segments.
    """
    f, valid = _valid_or_full(f, valid)
    c_c = constant_map(f, probe.center, probe.center_intensity, 0.0, valid)
    c_l = constant_map(f, probe.left, probe.side_intensity, discard_fraction, valid)
    c_r = constant_map(f, probe.right, probe.side_intensity, discard_fraction, valid)
    return np.minimum(c_c, np.minimum(c_l, c_r))


def detector_map_orientation(f, probe: RasterProbe, discard_fraction=DEFAULT_DISCARD_FRACTION, valid=None) -> np.ndarray:
    """Larger of the left and right detectors for one oriented probe."""
    f, valid = _valid_or_full(f, valid)
    return kernels.orientation_detector(
        f, valid, probe.center, probe.left, probe.right,
        probe.center_intensity, probe.side_intensity, discard_fraction,
    )


def detector_map_probe(f, spec: ProbeSpec, params: DetectorParams = DetectorParams(), valid=None) -> np.ndarray:
    """Minimum over all orientations; undefined orientations are skipped."""
    f, valid = _valid_or_full(f, valid)
    out = None
    for theta in params.orientations:
        e = detector_map_orientation(f, rasterize(spec, theta), params.discard_fraction, valid)
        out = e if out is None else np.fmin(out, e)
    return out


def probe_maps(f, family: ProbeFamily, params: DetectorParams = None, valid=None, n_probes=None) -> list:
    """Per-scale detector maps for the first ``n_probes`` probes of ``family``."""
    if params is None:
        params = DetectorParams(orientations=family.orientations)
    n_probes = len(family) if n_probes is None else n_probes
    return [detector_map_probe(f, family.probes[i], params, valid) for i in range(n_probes)]


def combine_scales(maps, fov, n_probes: int) -> VesselnessMap:
    """Point-wise minimum of the first ``n_probes`` per-scale maps."""
    if not 1 <= n_probes <= len(maps):
        raise ValueError(f"n_probes must be in [1, {len(maps)}], got {n_probes}")
    data = maps[0].copy()
    for m in maps[1:n_probes]:
        data = np.fmin(data, m)
    data[~fov] = np.nan
    return VesselnessMap(data, np.asarray(fov, dtype=bool), n_probes)


def vesselness_multiscale(f, family: ProbeFamily, n_probes: int = None, params: DetectorParams = None, valid=None) -> VesselnessMap:
    """Vesselness map from the ``n_probes`` largest scales of ``family``."""
    f, valid = _valid_or_full(f, valid)
    n_probes = len(family) if n_probes is None else n_probes
    if not 1 <= n_probes <= len(family):
        raise ValueError(f"n_probes must be in [1, {len(family)}], got {n_probes}")
    maps = probe_maps(f, family, params, valid, n_probes)
    return combine_scales(maps, valid, n_probes)


def profile_detector_1d(profile, b_left, b_center, b_right, d: int) -> np.ndarray:
    """Bump detector along a 1-D profile with a 3-point probe at ``-d, 0, +d``.

    The probe is lifted by the LIP constant that brings it into contact
    with the profile; each side then reports its LIP gap to that contact
    level and the larger gap is kept. Positions closer than ``d`` to either
    end are NaN.
    """
    p = np.asarray(profile, dtype=np.float64).ravel()
    if d < 1 or p.size <= 2 * d:
        raise ValueError(f"profile of length {p.size} is too short for offsets +-{d}")
    out = np.full(p.size, np.nan)
    for x in range(d, p.size - d):
        c_l = lip_sub(p[x - d], b_left)
        c_c = lip_sub(p[x], b_center)
        c_r = lip_sub(p[x + d], b_right)
        c = min(c_c, min(c_l, c_r))
        out[x] = max(lip_sub(c_l, c), lip_sub(c_r, c))
    return out


def normalize_map(e: VesselnessMap) -> VesselnessMap:
    """Map ``e`` to ``[0, 1]`` with vessels near 1.

    Values above the median of the defined pixels are clipped to it, then
    the clipped map is rescaled and flipped. A flat map normalizes to 0.
    """
    vals = e.values()
    if vals.size == 0:
        raise ValueError("vesselness map has no defined pixel")
    mu = np.median(vals)
    clipped = np.minimum(e.data, mu)
    lo, hi = np.nanmin(clipped[e.defined]), mu
    if hi == lo:
        phi = np.where(e.defined, 0.0, np.nan)
    else:
        phi = np.where(e.defined, 1.0 - (clipped - lo) / (hi - lo), np.nan)
    return VesselnessMap(phi, e.fov, e.probes_used)
