"""IoU, greedy GT/detection matching, per-class AP, and weighted mAP.

Matching is per frame and class-exact: a detection can only match a
ground-truth box of the identical canonical class in the same clip and
frame, with IoU at or above the threshold (default 0.5).  AP uses
all-point interpolation over the descending-confidence sweep; the
final score weights each class's AP by its ground-truth instance count.

All functions are pure; AP is computed in exact rational arithmetic and
returned as a float.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .annot import BoundingBox, Clip, DatasetSplit
from .detector import Detection, detection_sort_key
from .errors import ValidationError
from .taxonomy import decode as decode_label
from .taxonomy import Position


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area; 0 when disjoint."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


@dataclass(frozen=True)
class GroundTruthBox:
    clip_id: str
    track_id: str
    frame_index: int
    box: BoundingBox


@dataclass(frozen=True)
class MatchOutcome:
    detection: Detection
    is_tp: bool
    matched: GroundTruthBox | None = None


@dataclass(frozen=True)
class MatchResult:
    """TP/FP assignment for one class's detections against its ground truth."""

    outcomes: tuple[MatchOutcome, ...]  # descending confidence
    n_gt: int
    iou_threshold: float

    @property
    def tp_count(self) -> int:
        return sum(1 for o in self.outcomes if o.is_tp)

    @property
    def fp_count(self) -> int:
        return len(self.outcomes) - self.tp_count

    @property
    def fn_count(self) -> int:
        return self.n_gt - self.tp_count


def match(gt_boxes: Sequence[GroundTruthBox], detections: Sequence[Detection],
          iou_threshold: float = 0.5) -> MatchResult:
    """Greedy matching: highest-confidence detection first, each claims the
    unmatched same-frame GT box with the highest IoU >= threshold (ties by
    lowest track id); unclaimed detections are FP, unclaimed GT are FN.
    """
    by_frame: dict[tuple[str, int], list[GroundTruthBox]] = {}
    for g in gt_boxes:
        by_frame.setdefault((g.clip_id, g.frame_index), []).append(g)
    matched: set[GroundTruthBox] = set()
    ordered = sorted(detections,
                     key=lambda d: (-d.confidence,) + detection_sort_key(d))
    outcomes = []
    for det in ordered:
        candidates = by_frame.get((det.clip_id, det.frame_index), ())
        best = None
        best_iou = 0.0
        for g in candidates:
            if g in matched:
                continue
            v = iou(det.box, g.box)
            if v < iou_threshold:
                continue
            if best is None or v > best_iou or (v == best_iou
                                                and g.track_id < best.track_id):
                best, best_iou = g, v
        if best is not None:
            matched.add(best)
            outcomes.append(MatchOutcome(det, True, best))
        else:
            outcomes.append(MatchOutcome(det, False))
    return MatchResult(outcomes=tuple(outcomes), n_gt=len(gt_boxes),
                       iou_threshold=iou_threshold)


@dataclass(frozen=True)
class PrCurve:
    """(recall, precision) points of the descending-confidence sweep."""

    points: tuple[tuple[float, float], ...]


def pr_curve(result: MatchResult) -> PrCurve:
    points = []
    tp = fp = 0
    for o in result.outcomes:
        if o.is_tp:
            tp += 1
        else:
            fp += 1
        points.append((tp / result.n_gt, tp / (tp + fp)))
    return PrCurve(points=tuple(points))


def _ap_fraction(tp_flags: Sequence[bool], n_gt: int) -> Fraction:
    # All-point interpolation: integrate max-precision-at-recall>=r over recall.
    tp = fp = 0
    points: list[tuple[Fraction, Fraction]] = []
    for flag in tp_flags:
        if flag:
            tp += 1
        else:
            fp += 1
        points.append((Fraction(tp, n_gt), Fraction(tp, tp + fp)))
    ap = Fraction(0)
    running_max = Fraction(0)
    prev_recall = None
    for recall, precision in reversed(points):
        if running_max < precision:
            running_max = precision
        if prev_recall is not None and recall < prev_recall:
            ap += (prev_recall - recall) * prev_max
        prev_recall, prev_max = recall, running_max
    if prev_recall is not None:
        ap += prev_recall * prev_max
    return ap


def average_precision(result: MatchResult) -> float:
    """All-point interpolated AP in [0, 1]; undefined for zero GT instances."""
    if result.n_gt == 0:
        raise ValidationError("AP is undefined for a class with no ground truth",
                              rule="undefined-ap")
    return float(_ap_fraction([o.is_tp for o in result.outcomes], result.n_gt))


def weighted_map(per_class_ap: Mapping[str, float | None],
                 per_class_count: Mapping[str, float]) -> float:
    """Instance-count-weighted mean AP over classes with a defined AP."""
    total = Fraction(0)
    weighted = Fraction(0)
    for label, ap in per_class_ap.items():
        if ap is None:
            continue
        count = per_class_count.get(label, 0)
        if count < 0:
            raise ValidationError(f"negative instance count for {label}",
                                  rule="negative-count")
        total += Fraction(count)
        weighted += Fraction(count) * Fraction(ap)
    if total == 0:
        raise ValidationError("weighted mAP is undefined: no class has both a "
                              "defined AP and a positive count",
                              rule="undefined-weighted-map")
    return float(weighted / total)


@dataclass(frozen=True)
class ClassResult:
    label: str
    gt_count: int
    detection_count: int
    ap: float | None  # None when the class has no GT instances


@dataclass(frozen=True)
class ApReport:
    per_class: dict[str, ClassResult]
    weighted_map: float
    iou_threshold: float

    def filtered_weighted_map(self, keep: Callable[[str], bool]) -> float:
        aps = {l: r.ap for l, r in self.per_class.items() if keep(l)}
        counts = {l: r.gt_count for l, r in self.per_class.items() if keep(l)}
        return weighted_map(aps, counts)

    def to_table(self) -> str:
        """Delimited table: class, GT instances, detections, AP; weighted footer."""
        lines = ["class\tgt_instances\tdetections\tap_percent"]
        ordered = sorted(self.per_class.values(),
                         key=lambda r: (-r.gt_count, r.label))
        for r in ordered:
            ap = f"{100 * r.ap:.1f}" if r.ap is not None else "--"
            lines.append(f"{r.label}\t{r.gt_count}\t{r.detection_count}\t{ap}")
        lines.append(f"weighted_map\t\t\t{100 * self.weighted_map:.1f}")
        return "\n".join(lines) + "\n"


def max_two_riders(label: str) -> bool:
    """Class filter: at most two riders and no front passenger (P0)."""
    config = decode_label(label)
    positions = {p for p, _ in config.riders}
    return config.rider_count <= 2 and Position.P0 not in positions


CLASS_FILTERS: dict[str, Callable[[str], bool]] = {
    "all": lambda label: True,
    "max2riders": max_two_riders,
}


def gt_boxes_of(clips: Iterable[Clip],
                clip_ids: set[str] | None = None) -> dict[str, list[GroundTruthBox]]:
    """Frame-level ground-truth boxes grouped by class label."""
    out: dict[str, list[GroundTruthBox]] = {}
    for clip in clips:
        if clip_ids is not None and clip.clip_id not in clip_ids:
            continue
        for track in clip.tracks:
            for fi, box in track.boxes.items():
                out.setdefault(track.label, []).append(
                    GroundTruthBox(clip.clip_id, track.track_id, fi, box))
    return out


def evaluate(clips: Sequence[Clip], detections: Sequence[Detection],
             clip_ids: set[str] | None = None,
             iou_threshold: float = 0.5,
             class_filter: Callable[[str], bool] | None = None) -> ApReport:
    """Per-class AP and weighted mAP over all classes present in the GT.

    ``clip_ids`` restricts the evaluation to a split bucket. Detections for
    classes with no GT contribute nothing (their AP is undefined and they are
    excluded from the weighted mean).  ``class_filter`` restricts which
    classes enter the report at all.
    """
    gt_by_class = gt_boxes_of(clips, clip_ids)
    if not gt_by_class:
        raise ValidationError("no ground-truth instances in the selected clips",
                              rule="empty-bucket")
    det_by_class: dict[str, list[Detection]] = {}
    for d in detections:
        if clip_ids is not None and d.clip_id not in clip_ids:
            continue
        det_by_class.setdefault(d.label, []).append(d)
    labels = set(gt_by_class) | set(det_by_class)
    if class_filter is not None:
        labels = {l for l in labels if class_filter(l)}
    per_class: dict[str, ClassResult] = {}
    for label in sorted(labels):
        gts = gt_by_class.get(label, [])
        dets = det_by_class.get(label, [])
        if not gts:
            per_class[label] = ClassResult(label, 0, len(dets), None)
            continue
        result = match(gts, dets, iou_threshold)
        per_class[label] = ClassResult(label, len(gts), len(dets),
                                       average_precision(result))
    wmap = weighted_map({l: r.ap for l, r in per_class.items()},
                        {l: r.gt_count for l, r in per_class.items()})
    return ApReport(per_class=per_class, weighted_map=wmap,
                    iou_threshold=iou_threshold)


def split_bucket_ids(split: DatasetSplit, bucket: str) -> set[str]:
    return set(split.clip_ids(bucket))
