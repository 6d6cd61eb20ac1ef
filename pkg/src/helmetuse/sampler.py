"""Clip segmentation, representativeness scoring, and per-site selection.

A site's source timeline is cut into non-overlapping fixed-length
candidates (default 100 frames, 10 s at 10 fps).  Candidates are scored
by mean motorcycles per frame from any detector's output, a per-site
quota is apportioned proportional to recorded hours, and the top-scoring
candidates are selected per site.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .annot import apportion, atomic_write_text
from .detector import Detection
from .errors import ParseError, ValidationError

CLIP_LEN = 100


@dataclass(frozen=True)
class ClipCandidate:
    """A candidate clip aligned to a fixed-length boundary of a site timeline."""

    site_id: str
    start_frame: int
    score: float = 0.0

    def __post_init__(self):
        if self.start_frame < 0 or self.score < 0:
            raise ValidationError("start_frame and score must be >= 0",
                                  rule="candidate-negative")


def segment(site_id: str, total_frames: int,
            clip_len: int = CLIP_LEN) -> list[ClipCandidate]:
    """Non-overlapping candidates; a trailing partial clip is discarded."""
    if total_frames < 0:
        raise ValidationError("total_frames must be >= 0", rule="frames-negative")
    if clip_len <= 0:
        raise ValidationError("clip_len must be positive", rule="clip-len")
    return [ClipCandidate(site_id, start, 0.0)
            for start in range(0, total_frames - clip_len + 1, clip_len)]


def score(candidates: Sequence[ClipCandidate], detections: Iterable[Detection],
          clip_len: int = CLIP_LEN) -> list[ClipCandidate]:
    """Score = mean motorcycle detections per frame over the candidate window.

    Detections address the site timeline: ``clip_id`` is the site id and
    ``frame_index`` is the global frame number.
    """
    per_frame: dict[tuple[str, int], int] = {}
    for d in detections:
        key = (d.clip_id, d.frame_index)
        per_frame[key] = per_frame.get(key, 0) + 1
    out = []
    for cand in candidates:
        total = sum(per_frame.get((cand.site_id, f), 0)
                    for f in range(cand.start_frame, cand.start_frame + clip_len))
        out.append(replace(cand, score=total / clip_len))
    return out


def allocate(site_hours: Mapping[str, float], quota: int) -> dict[str, int]:
    """Apportion the sampling quota per site, proportional to recorded hours.

    Largest-remainder; remainder ties break lexicographically by site id.
    """
    if quota < 0:
        raise ValidationError("quota must be >= 0", rule="quota-negative")
    for site, hours in site_hours.items():
        if hours < 0:
            raise ValidationError(f"site {site}: negative hours", rule="site-hours")
    sites = sorted(site_hours)
    if quota > 0 and sum(site_hours.values()) == 0:
        raise ValidationError("cannot allocate a positive quota over zero hours",
                              rule="allocate-zero-hours")
    counts = apportion([site_hours[s] for s in sites], quota)
    return dict(zip(sites, counts))


def select(scored: Sequence[ClipCandidate],
           allocation: Mapping[str, int]) -> list[ClipCandidate]:
    """Per site, the top-k candidates by score; ties go to the earliest start."""
    by_site: dict[str, list[ClipCandidate]] = {}
    for cand in scored:
        by_site.setdefault(cand.site_id, []).append(cand)
    out: list[ClipCandidate] = []
    for site_id in sorted(allocation):
        k = allocation[site_id]
        pool = by_site.get(site_id, [])
        if len(pool) < k:
            raise ValidationError(
                f"site {site_id}: {k} clips requested but only {len(pool)} "
                f"candidates available (short by {k - len(pool)})",
                rule="insufficient-candidates")
        ranked = sorted(pool, key=lambda c: (-c.score, c.start_frame))
        out.extend(sorted(ranked[:k], key=lambda c: c.start_frame))
    return out


def save_manifest(candidates: Sequence[ClipCandidate], path: str | Path) -> Path:
    """Selection manifest: site_id, start_frame, score; sorted by site then start."""
    path = Path(path)
    lines = [f"{c.site_id} {c.start_frame} {c.score!r}"
             for c in sorted(candidates, key=lambda c: (c.site_id, c.start_frame))]
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    return path


def load_manifest(path: str | Path) -> list[ClipCandidate]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = line.split(" ")
            if len(fields) != 3:
                raise ParseError("manifest record needs 3 fields", line=lineno)
            try:
                out.append(ClipCandidate(fields[0], int(fields[1]), float(fields[2])))
            except ValueError as exc:
                raise ParseError(f"malformed field: {exc}", line=lineno) from exc
    return out


def load_site_hours(path: str | Path) -> dict[str, float]:
    """Sites file: one ``site_id hours`` pair per line."""
    out: dict[str, float] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(" ")
            if len(fields) != 2:
                raise ParseError("sites record needs 2 fields: site_id hours",
                                 line=lineno)
            if fields[0] in out:
                raise ParseError(f"duplicate site id {fields[0]!r}", line=lineno)
            try:
                out[fields[0]] = float(fields[1])
            except ValueError as exc:
                raise ParseError(f"malformed hours: {exc}", line=lineno) from exc
    return out
