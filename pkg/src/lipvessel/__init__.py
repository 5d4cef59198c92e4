"""Retinal vessel segmentation by probing the LIP image surface from below."""

from .evaluation import aggregate, confusion, metrics
from .fileio import read_color_image, read_mask, write_mask_png
from .kernels import get_backend, set_backend, use_backend
from .lip import M, complement, lip_add, lip_sub, luminance
from .segmentation import PipelineParams, segment_complemented, segment_vessels
from .vesselness import VesselnessMap, normalize_map, vesselness_multiscale

__all__ = [
    "M", "lip_add", "lip_sub", "luminance", "complement",
    "PipelineParams", "segment_vessels", "segment_complemented",
    "VesselnessMap", "vesselness_multiscale", "normalize_map",
    "confusion", "metrics", "aggregate",
    "read_color_image", "read_mask", "write_mask_png",
    "get_backend", "set_backend", "use_backend",
]

__version__ = "0.1.0"
