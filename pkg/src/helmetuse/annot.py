"""Annotation data model, file persistence, and dataset splits.

The annotation file format (UTF-8, line-delimited, space-separated) is
documented in docs/annotation-format.md; that document is normative.
Writes are atomic: content goes to a temp file which is then renamed.
"""

from __future__ import annotations

import math
import os
import random
import tempfile
from dataclasses import dataclass, field, replace
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, ValidationError
from .taxonomy import decode as decode_label

BUCKETS = ("train", "val", "test")


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box, top-left origin, pixel units of the clip's resolution."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"box {name} must be finite, got {v}",
                                      rule="box-not-finite")
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(
                f"box width/height must be positive, got w={self.w}, h={self.h}",
                rule="box-degenerate")

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class Track:
    """One motorcycle's presence across the frames of a clip.

    The class is constant over the track's life.  Frame gaps are allowed
    (occlusion); only explicitly placed boxes are stored.
    """

    track_id: str
    label: str
    boxes: dict[int, BoundingBox]

    def __post_init__(self):
        decode_label(self.label)  # raises on malformed labels
        if not self.boxes:
            raise ValidationError(f"track {self.track_id} has no boxes",
                                  rule="track-empty")

    def validate_frames(self, frame_count: int) -> None:
        for fi in self.boxes:
            if not 0 <= fi < frame_count:
                raise ValidationError(
                    f"track {self.track_id}: frame index out of range "
                    f"({fi} not in [0, {frame_count}))",
                    rule="frame-index-out-of-range")


@dataclass(frozen=True)
class Clip:
    clip_id: str
    site_id: str
    start_timestamp: datetime
    fps: float
    frame_count: int
    resolution: tuple[int, int]
    tracks: tuple[Track, ...] = ()

    def __post_init__(self):
        if self.fps <= 0 or self.frame_count <= 0:
            raise ValidationError(
                f"clip {self.clip_id}: fps and frame_count must be positive",
                rule="clip-timing")
        if self.resolution[0] <= 0 or self.resolution[1] <= 0:
            raise ValidationError(f"clip {self.clip_id}: resolution must be positive",
                                  rule="clip-resolution")
        seen = set()
        for t in self.tracks:
            if t.track_id in seen:
                raise ValidationError(
                    f"clip {self.clip_id}: duplicate track id {t.track_id}",
                    rule="duplicate-track-id")
            seen.add(t.track_id)
            t.validate_frames(self.frame_count)

    def frame_time(self, frame_index: int) -> datetime:
        from datetime import timedelta
        return self.start_timestamp + timedelta(seconds=frame_index / self.fps)


@dataclass(frozen=True)
class Site:
    site_id: str
    city: str
    recorded_hours: float

    def __post_init__(self):
        if self.recorded_hours < 0:
            raise ValidationError(f"site {self.site_id}: negative recorded hours",
                                  rule="site-hours")


@dataclass(frozen=True)
class DatasetSplit:
    """Bucket membership per clip, plus sites excluded for leave-site-out."""

    assignment: dict[str, str]
    excluded_sites: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        for clip_id, bucket in self.assignment.items():
            if bucket not in BUCKETS:
                raise ValidationError(f"clip {clip_id}: unknown bucket {bucket!r}",
                                      rule="unknown-bucket")

    def clip_ids(self, bucket: str) -> list[str]:
        return sorted(c for c, b in self.assignment.items() if b == bucket)

    def counts(self) -> dict[str, int]:
        out = {b: 0 for b in BUCKETS}
        for b in self.assignment.values():
            out[b] += 1
        return out


# --- file format ------------------------------------------------------------

def _format_num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _clip_line(clip: Clip) -> str:
    ts = clip.start_timestamp.isoformat()
    return (f"clip {clip.clip_id} {clip.site_id} {ts} {_format_num(clip.fps)} "
            f"{clip.frame_count} {clip.resolution[0]} {clip.resolution[1]}")


def _track_line(track: Track) -> str:
    frames = " ".join(
        f"{fi}:{_format_num(b.x)}:{_format_num(b.y)}:{_format_num(b.w)}:{_format_num(b.h)}"
        for fi, b in sorted(track.boxes.items()))
    return f"track {track.track_id} {track.label} {frames}"


def save_annotations(clips: Iterable[Clip], path: str | Path) -> Path:
    """Write clips in canonical order (clips by id, tracks by id, frames ascending)."""
    path = Path(path)
    lines = []
    for clip in sorted(clips, key=lambda c: c.clip_id):
        lines.append(_clip_line(clip))
        for track in sorted(clip.tracks, key=lambda t: t.track_id):
            lines.append(_track_line(track))
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    return path


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_annotations(path: str | Path) -> list[Clip]:
    """Parse and validate an annotation file; see docs/annotation-format.md."""
    path = Path(path)
    clips: list[Clip] = []
    current: dict | None = None

    def flush():
        nonlocal current
        if current is not None:
            clips.append(Clip(tracks=tuple(current.pop("tracks")), **current))
            current = None

    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split(" ")
            kind = fields[0]
            try:
                if kind == "clip":
                    flush()
                    if len(fields) != 8:
                        raise ParseError(
                            f"clip record needs 8 fields, got {len(fields)}",
                            line=lineno)
                    _, clip_id, site_id, ts, fps, fc, w, h = fields
                    current = dict(
                        clip_id=clip_id, site_id=site_id,
                        start_timestamp=datetime.fromisoformat(ts),
                        fps=float(fps), frame_count=int(fc),
                        resolution=(int(w), int(h)), tracks=[])
                elif kind == "track":
                    if current is None:
                        raise ParseError("track record before any clip record",
                                         line=lineno)
                    if len(fields) < 4:
                        raise ParseError(
                            f"track record needs id, class and at least one box, "
                            f"got {len(fields)} fields", line=lineno)
                    boxes = {}
                    for quint in fields[3:]:
                        parts = quint.split(":")
                        if len(parts) != 5:
                            raise ParseError(
                                f"box must be frame:x:y:w:h, got {quint!r}",
                                line=lineno)
                        fi = int(parts[0])
                        if not 0 <= fi < current["frame_count"]:
                            raise ParseError(
                                f"frame index out of range ({fi} not in "
                                f"[0, {current['frame_count']}))",
                                line=lineno, rule="frame-index-out-of-range")
                        if fi in boxes:
                            raise ParseError(f"duplicate frame index {fi}",
                                             line=lineno)
                        boxes[fi] = BoundingBox(*(float(p) for p in parts[1:]))
                    current["tracks"].append(
                        Track(track_id=fields[1], label=fields[2], boxes=boxes))
                else:
                    raise ParseError(f"unknown record type {kind!r}", line=lineno)
            except (ValueError,) as exc:
                raise ParseError(f"malformed field: {exc}", line=lineno) from exc
            except ValidationError as exc:
                if isinstance(exc, ParseError) and exc.line is not None:
                    raise
                raise ParseError(str(exc), line=lineno, rule=exc.rule) from exc
    flush()
    seen = set()
    for clip in clips:
        if clip.clip_id in seen:
            raise ValidationError(f"duplicate clip id {clip.clip_id}",
                                  rule="duplicate-clip-id")
        seen.add(clip.clip_id)
    return clips


# --- splits -----------------------------------------------------------------

def apportion(weights: Sequence[float], total: int) -> list[int]:
    """Largest-remainder apportionment of ``total`` proportional to ``weights``.

    Remainder ties go to the earliest index. Exact arithmetic via Fraction
    so equal weights never tie-break on float noise.
    """
    if total < 0:
        raise ValidationError("total must be non-negative", rule="apportion-total")
    wsum = Fraction(sum(Fraction(w) for w in weights))
    if wsum == 0:
        if total > 0:
            raise ValidationError("cannot apportion a positive total over zero weights",
                                  rule="apportion-zero-weights")
        return [0] * len(weights)
    exact = [Fraction(w) * total / wsum for w in weights]
    base = [int(e) for e in exact]
    leftover = total - sum(base)
    order = sorted(range(len(weights)), key=lambda i: (-(exact[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def make_split(clips: Sequence[Clip],
               ratios: tuple[float, float, float] = (0.7, 0.1, 0.2),
               seed: int = 0) -> DatasetSplit:
    """Random split, stratified per site by largest-remainder apportionment."""
    if not clips:
        raise ValidationError("cannot split an empty clip list", rule="empty-clips")
    if not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ValidationError(f"ratios must sum to 1, got {sum(ratios)}",
                              rule="ratio-sum")
    by_site: dict[str, list[str]] = {}
    for clip in clips:
        by_site.setdefault(clip.site_id, []).append(clip.clip_id)
    rng = random.Random(seed)
    assignment: dict[str, str] = {}
    for site_id in sorted(by_site):
        ids = sorted(by_site[site_id])
        rng.shuffle(ids)
        n_train, n_val, n_test = apportion(ratios, len(ids))
        for clip_id in ids[:n_train]:
            assignment[clip_id] = "train"
        for clip_id in ids[n_train:n_train + n_val]:
            assignment[clip_id] = "val"
        for clip_id in ids[n_train + n_val:]:
            assignment[clip_id] = "test"
        assert n_train + n_val + n_test == len(ids)
    return DatasetSplit(assignment=assignment)


def leave_site_out(split: DatasetSplit, clips: Sequence[Clip],
                   site_id: str) -> DatasetSplit:
    """Remove a site's clips from train and val; its test clips stay."""
    sites = {c.site_id for c in clips}
    if site_id not in sites:
        raise ValidationError(f"unknown site id {site_id!r}", rule="unknown-site")
    site_clips = {c.clip_id for c in clips if c.site_id == site_id}
    assignment = {
        clip_id: bucket for clip_id, bucket in split.assignment.items()
        if not (clip_id in site_clips and bucket in ("train", "val"))
    }
    return DatasetSplit(assignment=assignment,
                        excluded_sites=split.excluded_sites | {site_id})


def save_split(split: DatasetSplit, path: str | Path) -> Path:
    path = Path(path)
    lines = [f"{clip_id} {bucket}" for clip_id, bucket
             in sorted(split.assignment.items())]
    for site in sorted(split.excluded_sites):
        lines.append(f"excluded_site {site}")
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    return path


def load_split(path: str | Path) -> DatasetSplit:
    assignment: dict[str, str] = {}
    excluded = set()
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = line.split(" ")
            if len(fields) != 2:
                raise ParseError("split record needs two fields", line=lineno)
            if fields[0] == "excluded_site":
                excluded.add(fields[1])
            else:
                assignment[fields[0]] = fields[1]
    return DatasetSplit(assignment=assignment, excluded_sites=frozenset(excluded))
