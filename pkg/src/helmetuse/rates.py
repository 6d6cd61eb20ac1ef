"""Frame-level helmet-use rate aggregation and human/machine comparison.

Machine rates are rider-weighted: within a time bucket the rate is
100 * (helmeted riders summed over kept detections) / (riders summed).
Empty buckets carry an undefined rate (None), never 0%.  Human-observer
counts arrive as 15-minute windows and are compared against machine
buckets that overlap them.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Literal, Sequence

from .annot import Clip, atomic_write_text
from .detector import Detection
from .errors import ParseError, ValidationError
from .metrics import iou
from .taxonomy import decode as decode_label

BUCKETING = {"hour": 3600, "15min": 900}


@dataclass(frozen=True)
class RateBucket:
    start: datetime
    duration: int  # seconds
    riders: int
    helmeted: int

    def __post_init__(self):
        if not 0 <= self.helmeted <= max(self.riders, 0) or self.riders < 0:
            raise ValidationError(
                f"bucket counts invalid: helmeted={self.helmeted}, riders={self.riders}",
                rule="bucket-counts")

    @property
    def rate(self) -> float | None:
        if self.riders == 0:
            return None
        return 100.0 * self.helmeted / self.riders

    @property
    def end(self) -> datetime:
        return self.start + timedelta(seconds=self.duration)

    def overlaps(self, other: "RateBucket") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class RateSeries:
    site_id: str
    source: Literal["human", "machine"]
    buckets: tuple[RateBucket, ...]

    def __post_init__(self):
        prev_end = None
        for b in self.buckets:
            if prev_end is not None and b.start < prev_end:
                raise ValidationError(
                    f"series {self.site_id}: buckets overlap or are out of order "
                    f"at {b.start.isoformat()}", rule="buckets-overlap")
            prev_end = b.end

    def overall_rate(self) -> float | None:
        """Rider-weighted rate over the whole series."""
        riders = sum(b.riders for b in self.buckets)
        helmeted = sum(b.helmeted for b in self.buckets)
        return 100.0 * helmeted / riders if riders else None


def dedupe_frame(detections: Sequence[Detection],
                 dedupe_iou: float) -> list[Detection]:
    """Suppress same-frame overlapping boxes, keeping the most confident."""
    kept: list[Detection] = []
    for d in sorted(detections, key=lambda d: (-d.confidence, d.box.x, d.box.y)):
        if all(iou(d.box, k.box) <= dedupe_iou for k in kept):
            kept.append(d)
    return kept


def _floor_bucket(ts: datetime, duration: int) -> datetime:
    day = ts.replace(hour=0, minute=0, second=0, microsecond=0)
    offset = int((ts - day).total_seconds()) // duration * duration
    return day + timedelta(seconds=offset)


def aggregate(detections: Sequence[Detection], clips: Sequence[Clip],
              confidence_threshold: float = 0.5, dedupe_iou: float = 0.5,
              bucketing: str = "hour",
              rider_weighted: bool = True) -> list[RateSeries]:
    """Machine rate series per site from frame-level detections.

    Detections below the confidence threshold are dropped; remaining
    same-frame boxes with IoU above ``dedupe_iou`` are suppressed in favor
    of the most confident one.  With ``rider_weighted=False`` each kept
    detection counts as one motorcycle whose driver's helmet decides
    (sensitivity variant).
    """
    if bucketing not in BUCKETING:
        raise ValidationError(f"unknown bucketing {bucketing!r}; "
                              f"expected one of {sorted(BUCKETING)}",
                              rule="unknown-bucketing")
    duration = BUCKETING[bucketing]
    clip_index = {c.clip_id: c for c in clips}
    by_frame: dict[tuple[str, int], list[Detection]] = {}
    for d in detections:
        if d.clip_id not in clip_index:
            raise ValidationError(f"detection references unknown clip {d.clip_id!r}",
                                  rule="unknown-clip")
        if d.confidence >= confidence_threshold:
            by_frame.setdefault((d.clip_id, d.frame_index), []).append(d)

    # site -> bucket start -> [riders, helmeted]
    acc: dict[str, dict[datetime, list[int]]] = {}
    for (clip_id, fi), frame_dets in by_frame.items():
        clip = clip_index[clip_id]
        start = _floor_bucket(clip.frame_time(fi), duration)
        slot = acc.setdefault(clip.site_id, {}).setdefault(start, [0, 0])
        for det in dedupe_frame(frame_dets, dedupe_iou):
            config = decode_label(det.label)
            if rider_weighted:
                slot[0] += config.rider_count
                slot[1] += config.helmeted_count
            else:
                # one motorcycle, decided by the driver (canonical-first rider)
                slot[0] += 1
                slot[1] += 1 if config.riders[0][1] else 0

    out = []
    for site_id in sorted(acc):
        buckets = tuple(
            RateBucket(start, duration, riders, helmeted)
            for start, (riders, helmeted) in sorted(acc[site_id].items()))
        out.append(RateSeries(site_id=site_id, source="machine", buckets=buckets))
    return out


def human_series(path: str | Path) -> list[RateSeries]:
    """Parse human-observer counts: ``site_id window_start helmeted unhelmeted``.

    Windows are 15 minutes (the first quarter of every observed hour).
    """
    rows: dict[str, list[RateBucket]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(" ")
            if len(fields) != 4:
                raise ParseError("counts record needs 4 fields: "
                                 "site_id window_start helmeted unhelmeted",
                                 line=lineno)
            try:
                start = datetime.fromisoformat(fields[1])
                helmeted, unhelmeted = int(fields[2]), int(fields[3])
            except ValueError as exc:
                raise ParseError(f"malformed field: {exc}", line=lineno) from exc
            if helmeted < 0 or unhelmeted < 0:
                raise ParseError("counts must be non-negative", line=lineno,
                                 rule="negative-count")
            rows.setdefault(fields[0], []).append(
                RateBucket(start, 900, helmeted + unhelmeted, helmeted))
    return [RateSeries(site_id=site, source="human",
                       buckets=tuple(sorted(rows[site], key=lambda b: b.start)))
            for site in sorted(rows)]


@dataclass(frozen=True)
class SiteComparison:
    site_id: str
    human_rate: float
    machine_rate: float

    @property
    def deviation(self) -> float:
        return self.machine_rate - self.human_rate


@dataclass(frozen=True)
class ComparisonReport:
    sites: tuple[SiteComparison, ...]

    @property
    def min_deviation(self) -> float:
        return min(s.deviation for s in self.sites)

    @property
    def max_deviation(self) -> float:
        return max(s.deviation for s in self.sites)

    @property
    def mean_abs_deviation(self) -> float:
        return sum(abs(s.deviation) for s in self.sites) / len(self.sites)

    def to_table(self) -> str:
        lines = ["site\thuman_rate\tmachine_rate\tdeviation"]
        for s in self.sites:
            lines.append(f"{s.site_id}\t{s.human_rate:.2f}\t{s.machine_rate:.2f}\t"
                         f"{s.deviation:+.2f}")
        lines.append(f"summary\tmin={self.min_deviation:+.2f}\t"
                     f"max={self.max_deviation:+.2f}\t"
                     f"mean_abs={self.mean_abs_deviation:.2f}")
        return "\n".join(lines) + "\n"


def compare(human: RateSeries, machine: RateSeries) -> SiteComparison:
    """Rider-weighted site averages over aligned windows, and their deviation.

    A machine bucket is aligned when it overlaps at least one human window
    (and vice versa); unmatched windows on either side are dropped.
    """
    if human.site_id != machine.site_id:
        raise ValidationError(
            f"site mismatch: {human.site_id!r} vs {machine.site_id!r}",
            rule="site-mismatch")
    h_used = [h for h in human.buckets
              if any(h.overlaps(m) for m in machine.buckets)]
    m_used = [m for m in machine.buckets
              if any(m.overlaps(h) for h in human.buckets)]
    h_riders = sum(b.riders for b in h_used)
    m_riders = sum(b.riders for b in m_used)
    if h_riders == 0 or m_riders == 0:
        raise ValidationError(
            f"site {human.site_id}: no overlapping windows with riders",
            rule="no-overlap")
    return SiteComparison(
        site_id=human.site_id,
        human_rate=100.0 * sum(b.helmeted for b in h_used) / h_riders,
        machine_rate=100.0 * sum(b.helmeted for b in m_used) / m_riders)


def comparison_report(human: Sequence[RateSeries],
                      machine: Sequence[RateSeries]) -> ComparisonReport:
    machine_by_site = {s.site_id: s for s in machine}
    sites = []
    for h in sorted(human, key=lambda s: s.site_id):
        if h.site_id in machine_by_site:
            sites.append(compare(h, machine_by_site[h.site_id]))
    if not sites:
        raise ValidationError("no common sites between human and machine series",
                              rule="no-common-sites")
    return ComparisonReport(sites=tuple(sites))


def series_table(series: Iterable[RateSeries]) -> str:
    lines = ["site\tsource\tbucket_start\tduration_s\triders\thelmeted\trate"]
    for s in series:
        for b in s.buckets:
            rate = f"{b.rate:.2f}" if b.rate is not None else "--"
            lines.append(f"{s.site_id}\t{s.source}\t{b.start.isoformat()}\t"
                         f"{b.duration}\t{b.riders}\t{b.helmeted}\t{rate}")
    return "\n".join(lines) + "\n"


def save_series(series: Iterable[RateSeries], path: str | Path) -> Path:
    path = Path(path)
    atomic_write_text(path, series_table(series))
    return path


def render_chart(series: Sequence[RateSeries], path: str | Path) -> Path:
    """Optional chart: hour on x, helmet-use percent on y, one line per source."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 4))
    for s in series:
        xs = [b.start for b in s.buckets if b.rate is not None]
        ys = [b.rate for b in s.buckets if b.rate is not None]
        ax.plot(xs, ys, marker="o", label=f"{s.site_id} ({s.source})")
    ax.set_xlabel("time")
    ax.set_ylabel("helmet use (%)")
    ax.set_ylim(0, 100)
    ax.legend(fontsize=8)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
