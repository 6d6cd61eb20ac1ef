"""Detector-agnostic toolkit for measuring motorcycle helmet use from video.

Subpackages cover the full measurement pipeline: class taxonomy
(``taxonomy``), annotation model and dataset splits (``annot``),
detector I/O and synthetic detections (``detector``), IoU/AP/weighted
mAP evaluation (``metrics``), clip sampling (``sampler``), helmet-use
rate aggregation and comparison (``rates``), plus a CLI (``cli``) and
the annotation HTTP service (``server``).
"""

from .annot import (BoundingBox, Clip, DatasetSplit, Site, Track,
                    leave_site_out, load_annotations, make_split,
                    save_annotations)
from .detector import Detection, NoiseProfile, load_detections, synth_detect
from .errors import HelmetUseError, ParseError, ValidationError
from .metrics import ApReport, MatchResult, average_precision, evaluate, iou, \
    match, weighted_map
from .rates import ComparisonReport, RateSeries, aggregate, compare, human_series
from .sampler import ClipCandidate, allocate, segment, select
from .taxonomy import (HelmetClass, Position, RiderConfig, decode, encode,
                       enumerate_classes, rider_stats)

__all__ = [
    "BoundingBox", "Clip", "DatasetSplit", "Site", "Track",
    "leave_site_out", "load_annotations", "make_split", "save_annotations",
    "Detection", "NoiseProfile", "load_detections", "synth_detect",
    "HelmetUseError", "ParseError", "ValidationError",
    "ApReport", "MatchResult", "average_precision", "evaluate", "iou",
    "match", "weighted_map",
    "ComparisonReport", "RateSeries", "aggregate", "compare", "human_series",
    "ClipCandidate", "allocate", "segment", "select",
    "HelmetClass", "Position", "RiderConfig", "decode", "encode",
    "enumerate_classes", "rider_stats",
]
