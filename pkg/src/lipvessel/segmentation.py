"""
From vesselness maps to a binary vessel mask, and the full per-image pipeline.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .lip import complement, image_mean, lip_add, luminance
from .probe import (
    CENTER_REFERENCE,
    REFERENCE_FOV_ANGLE,
    SIDE_REFERENCE,
    ProbeFamily,
    adapt_intensities,
    build_family,
    fov_diameter,
)
from .vesselness import (
    DetectorParams,
    VesselnessMap,
    combine_scales,
    detector_map_probe,
    normalize_map,
)

log = logging.getLogger(__name__)

EIGHT = np.ones((3, 3), dtype=bool)
POLARITIES = ("center-high", "verbatim")


@dataclass(frozen=True)
class PipelineParams:
    """Every tunable of the pipeline; defaults are the published settings.

    ``probe_polarity`` decides which segment receives the larger of the two
    adapted intensities. ``"center-high"`` gives it to the central segment,
    so the probe is a ridge that fits under a vessel; ``"verbatim"`` keeps
    ``center = m_f`` even though that makes the centre the lower segment.
    With ``adapt_intensity=False`` the reference intensities are used as is.
    """

    area_fraction: float = 0.12
    change_limit: float = 0.40
    max_probes: int = 3
    orientation_count: int = 18
    discard_fraction: float = 0.20
    fov_angle: float = REFERENCE_FOV_ANGLE
    fov_threshold: float = 20.0
    probe_polarity: str = "center-high"
    adapt_intensity: bool = True
    center_reference: float = CENTER_REFERENCE
    side_reference: float = SIDE_REFERENCE

    def __post_init__(self):
        for name in ("area_fraction", "change_limit"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not 0.0 <= self.discard_fraction < 1.0:
            raise ValueError(f"discard_fraction must lie in [0, 1), got {self.discard_fraction}")
        if self.max_probes not in (1, 2, 3):
            raise ValueError(f"max_probes must be 1, 2 or 3, got {self.max_probes}")
        if self.orientation_count < 1:
            raise ValueError(f"orientation_count must be >= 1, got {self.orientation_count}")
        if self.fov_angle <= 0:
            raise ValueError(f"fov_angle must be positive, got {self.fov_angle}")
        if self.probe_polarity not in POLARITIES:
            raise ValueError(f"probe_polarity must be one of {POLARITIES}, got {self.probe_polarity!r}")


@dataclass
class ProbeSelection:
    n_probes: int
    segmentation: np.ndarray
    maps: list = field(default_factory=list)  # VesselnessMap for I = 1..evaluated


@dataclass
class SegmentationResult:
    mask: np.ndarray
    vesselness: VesselnessMap
    normalized: VesselnessMap
    n_probes: int
    fov: np.ndarray
    family: ProbeFamily
    image_mean: float


def threshold_by_area(e: VesselnessMap, fraction: float) -> np.ndarray:
    """Mark the lowest ``fraction`` of the defined pixels as vessel.

    The threshold is the ``ceil(fraction * N)``-th smallest defined value
    and every pixel at or below it is set, so ties at the threshold may push
    the count above the target.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"area fraction must lie in (0, 1), got {fraction}")
    defined = e.defined
    vals = e.data[defined]
    if vals.size == 0:
        raise ValueError("vesselness map has no defined pixel")
    k = max(1, math.ceil(fraction * vals.size))
    t = np.partition(vals, k - 1)[k - 1]
    if vals.min() == vals.max():
        log.warning("flat vesselness map: every defined pixel selected")
    return defined & (e.data <= t)


def select_probe_count(f, family: ProbeFamily, params: PipelineParams, fov) -> ProbeSelection:
    """Add finer probe scales while the segmentation stays close to the coarsest one.

    Scale ``I`` is accepted while the number of pixels that change class
    between ``seg(e^I)`` and ``seg(e^1)`` is at most ``change_limit`` times
    the vessel area of ``seg(e^1)``; the first refusal stops the search.
    """
    fov = np.asarray(fov, dtype=bool)
    det = DetectorParams(params.discard_fraction, family.orientations)
    limit = min(params.max_probes, len(family))
    scale_maps = [detector_map_probe(f, family.probes[0], det, fov)]
    e1 = combine_scales(scale_maps, fov, 1)
    seg1 = threshold_by_area(e1, params.area_fraction)
    chosen, chosen_seg, maps = 1, seg1, [e1]
    for i in range(2, limit + 1):
        scale_maps.append(detector_map_probe(f, family.probes[i - 1], det, fov))
        ei = combine_scales(scale_maps, fov, i)
        segi = threshold_by_area(ei, params.area_fraction)
        maps.append(ei)
        changed = np.count_nonzero((segi != seg1) & fov)
        log.debug("I=%d: %d changed pixels vs %d vessel pixels", i, changed, seg1.sum())
        if changed > params.change_limit * np.count_nonzero(seg1):
            break
        chosen, chosen_seg = i, segi
    return ProbeSelection(chosen, chosen_seg, maps)


def remove_small_components(mask, min_area: float) -> np.ndarray:
    """Clear 8-connected components with fewer than ``min_area`` pixels."""
    mask = np.asarray(mask, dtype=bool)
    if min_area <= 0 or not mask.any():
        return mask.copy()
    labels, n = ndimage.label(mask, structure=EIGHT)
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_area
    keep[0] = False
    return keep[labels]


def fill_small_holes(mask) -> np.ndarray:
    """Fill background pockets that vanish under a 3x3 erosion.

    The background is eroded by the 3x3 square (outside the frame counts as
    background) and reconstructed by dilation under itself; what the
    reconstruction does not recover becomes vessel. For binary images the
    reconstruction is the union of the 8-connected background components
    that still contain an eroded pixel.
    """
    mask = np.asarray(mask, dtype=bool)
    background = ~mask
    seeds = ndimage.binary_erosion(background, structure=EIGHT, border_value=1)
    labels, _ = ndimage.label(background, structure=EIGHT)
    kept = np.unique(labels[seeds])
    recovered = np.isin(labels, kept[kept > 0])
    return ~recovered


def fov_from_image(lum, threshold: float = 20.0) -> np.ndarray:
    """FOV mask of a fundus photograph from its (non-complemented) luminance.

    Pixels strictly brighter than ``threshold``; the largest 8-connected
    component is kept and its holes filled.
    """
    bright = np.asarray(lum, dtype=np.float64) > threshold
    if not bright.any():
        raise ValueError(f"no pixel brighter than the FOV threshold {threshold:g}")
    labels, _ = ndimage.label(bright, structure=EIGHT)
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    return ndimage.binary_fill_holes(labels == np.argmax(sizes))


def probe_intensities(m_f: float, params: PipelineParams) -> tuple:
    """``(center, side)`` probe intensities for an image of mean ``m_f``."""
    if params.adapt_intensity:
        h_c, h_lr = adapt_intensities(m_f, params.center_reference, params.side_reference)
    else:
        h_c, h_lr = params.center_reference, params.side_reference
    if params.probe_polarity == "center-high" and h_c < h_lr:
        h_c, h_lr = h_lr, h_c
    return h_c, h_lr


def segment_complemented(f, fov, params: PipelineParams = PipelineParams()) -> SegmentationResult:
    """Segment vessels given the complemented luminance ``f`` and a FOV mask."""
    f = np.asarray(f, dtype=np.float64)
    fov = np.asarray(fov, dtype=bool)
    if f.shape != fov.shape:
        raise ValueError(f"FOV shape {fov.shape} does not match image {f.shape}")
    m_f = image_mean(f, fov)
    h_c, h_lr = probe_intensities(m_f, params)
    family = build_family(
        fov_diameter(fov), params.fov_angle, h_c, h_lr,
        n_orientations=params.orientation_count, max_probes=params.max_probes,
    )
    largest = family.probes[0]
    if max(largest.width, largest.length) + 1 > min(f.shape):
        raise ValueError(f"image {f.shape} is smaller than the largest probe (w={largest.width:.2f})")

    sel = select_probe_count(f, family, params, fov)
    min_area = (family.probes[0].width / 2.0) ** 2
    mask = remove_small_components(sel.segmentation, min_area)
    mask = fill_small_holes(mask) & fov
    e = sel.maps[sel.n_probes - 1]
    return SegmentationResult(mask, e, normalize_map(e), sel.n_probes, fov, family, m_f)


def segment_vessels(rgb, fov=None, params: PipelineParams = PipelineParams()) -> SegmentationResult:
    """Full pipeline on an RGB fundus image.

    The FOV is thresholded from the luminance when not given.
    """
    lum = luminance(rgb)
    if fov is None:
        fov = fov_from_image(lum, params.fov_threshold)
    return segment_complemented(complement(lum), fov, params)


def lip_shift(f, c0: float):
    """LIP-add a constant, i.e. simulate a uniform change of exposure."""
    return lip_add(np.asarray(f, dtype=np.float64), c0)
