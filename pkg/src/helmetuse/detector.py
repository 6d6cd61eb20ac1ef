"""Detector output ingestion and synthetic detection generation.

Any real detector is adapted behind two surfaces: a line-delimited
detection file (see docs/detection-format.md) and an HTTP inference
service.  ``synth_detect`` produces detections directly from ground
truth under a configurable noise profile; it is the test oracle for the
metrics and rate modules.
"""

from __future__ import annotations

import base64
import concurrent.futures
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import httpx
import numpy as np

from .annot import BoundingBox, Clip, atomic_write_text
from .errors import ParseError, ValidationError
from .taxonomy import enumerate_classes, is_valid_label


@dataclass(frozen=True)
class Detection:
    clip_id: str
    frame_index: int
    box: BoundingBox
    label: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(
                f"confidence must be in [0, 1], got {self.confidence}",
                rule="confidence-range")
        if not is_valid_label(self.label):
            raise ValidationError(f"invalid class label {self.label!r}",
                                  rule="invalid-label")


def detection_sort_key(d: Detection):
    # Descending confidence; ties by box x for reproducible metric curves.
    return (d.clip_id, d.frame_index, -d.confidence, d.box.x)


def sort_detections(detections: Iterable[Detection]) -> list[Detection]:
    return sorted(detections, key=detection_sort_key)


@dataclass(frozen=True)
class NoiseProfile:
    """Knobs for degrading ground truth into realistic detector output."""

    jitter_sigma: float = 0.0     # Gaussian corner noise, pixels
    miss_rate: float = 0.0        # probability a GT box is dropped
    fp_rate: float = 0.0          # expected spurious boxes per frame
    class_confusion: float = 0.0  # probability the label is swapped
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("miss_rate", "class_confusion"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {v}",
                                      rule="noise-probability")
        if self.jitter_sigma < 0 or self.fp_rate < 0:
            raise ValidationError("jitter_sigma and fp_rate must be >= 0",
                                  rule="noise-negative")

    @property
    def is_zero(self) -> bool:
        return (self.jitter_sigma == 0 and self.miss_rate == 0
                and self.fp_rate == 0 and self.class_confusion == 0)


# --- file format ------------------------------------------------------------

def save_detections(detections: Iterable[Detection], path: str | Path) -> Path:
    path = Path(path)
    lines = []
    for d in sort_detections(detections):
        b = d.box
        lines.append(f"{d.clip_id} {d.frame_index} {b.x!r} {b.y!r} {b.w!r} {b.h!r} "
                     f"{d.label} {d.confidence:.6f}")
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    return path


def load_detections(path: str | Path) -> list[Detection]:
    """Load a detection file; returns a stable (clip, frame, conf desc) order."""
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = line.split(" ")
            if len(fields) != 8:
                raise ParseError(f"detection record needs 8 fields, got {len(fields)}",
                                 line=lineno)
            try:
                det = Detection(
                    clip_id=fields[0],
                    frame_index=int(fields[1]),
                    box=BoundingBox(*(float(v) for v in fields[2:6])),
                    label=fields[6],
                    confidence=float(fields[7]))
            except ValueError as exc:
                raise ParseError(f"malformed field: {exc}", line=lineno) from exc
            except ValidationError as exc:
                raise ParseError(str(exc), line=lineno, rule=exc.rule) from exc
            out.append(det)
    return sort_detections(out)


# --- synthetic detections ---------------------------------------------------

def synth_detect(clips: Sequence[Clip], profile: NoiseProfile) -> list[Detection]:
    """Generate detections from ground truth under a noise profile.

    With an all-zero profile the output is exactly the annotated boxes at
    confidence 1.0.  Deterministic for a given ``rng_seed``.
    """
    rng = np.random.default_rng(profile.rng_seed)
    all_labels = [c.label for c in enumerate_classes(5)]
    out: list[Detection] = []
    for clip in sorted(clips, key=lambda c: c.clip_id):
        width, height = clip.resolution
        for track in sorted(clip.tracks, key=lambda t: t.track_id):
            for fi, box in sorted(track.boxes.items()):
                if profile.miss_rate > 0 and rng.random() < profile.miss_rate:
                    continue
                label = track.label
                if profile.class_confusion > 0 and rng.random() < profile.class_confusion:
                    others = [l for l in all_labels if l != label]
                    label = others[rng.integers(len(others))]
                if profile.jitter_sigma > 0:
                    x1, y1 = box.x, box.y
                    x2, y2 = box.x + box.w, box.y + box.h
                    x1, y1, x2, y2 = (v + rng.normal(0, profile.jitter_sigma)
                                      for v in (x1, y1, x2, y2))
                    new = BoundingBox(x=min(x1, x2), y=min(y1, y2),
                                      w=max(abs(x2 - x1), 1e-3),
                                      h=max(abs(y2 - y1), 1e-3))
                else:
                    new = box
                conf = 1.0 if profile.is_zero else round(0.5 + 0.5 * rng.random(), 6)
                out.append(Detection(clip.clip_id, fi, new, label, conf))
        if profile.fp_rate > 0:
            for fi in range(clip.frame_count):
                for _ in range(int(rng.poisson(profile.fp_rate))):
                    w = 1 + rng.random() * width / 4
                    h = 1 + rng.random() * height / 4
                    fp_box = BoundingBox(x=rng.random() * (width - w),
                                         y=rng.random() * (height - h), w=w, h=h)
                    fp_label = all_labels[rng.integers(len(all_labels))]
                    out.append(Detection(clip.clip_id, fi, fp_box, fp_label,
                                         round(rng.random(), 6)))
    return sort_detections(out)


# --- remote inference client ------------------------------------------------

@dataclass(frozen=True)
class FrameRef:
    clip_id: str
    frame_index: int
    image: bytes


def remote_detect(frames: Sequence[FrameRef], endpoint: str, *,
                  max_in_flight: int = 4, max_retries: int = 3,
                  timeout: float = 30.0, backoff_base: float = 0.5,
                  client_factory: Callable[[], httpx.Client] | None = None,
                  ) -> list[Detection]:
    """Fetch detections for frames from an HTTP inference service.

    One POST per frame, up to ``max_in_flight`` concurrent requests.
    Transient failures (network errors, 5xx) are retried with exponential
    backoff up to ``max_retries`` attempts; results are re-ordered
    deterministically before return.
    """
    if client_factory is None:
        client_factory = lambda: httpx.Client(timeout=timeout)

    def fetch(client: httpx.Client, frame: FrameRef) -> list[Detection]:
        payload = {
            "clip_id": frame.clip_id,
            "frame_index": frame.frame_index,
            "image": base64.b64encode(frame.image).decode("ascii"),
        }
        last_exc: Exception | None = None
        for attempt in range(max_retries):
            try:
                resp = client.post(endpoint, json=payload)
                if resp.status_code >= 500:
                    raise httpx.HTTPStatusError(
                        f"server error {resp.status_code}",
                        request=resp.request, response=resp)
                resp.raise_for_status()
                return _parse_response(frame, resp)
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                if (isinstance(exc, httpx.HTTPStatusError)
                        and exc.response.status_code < 500):
                    raise
                last_exc = exc
                if attempt + 1 < max_retries:
                    time.sleep(backoff_base * 2 ** attempt)
        raise ValidationError(
            f"inference request for ({frame.clip_id}, {frame.frame_index}) "
            f"failed after {max_retries} attempts: {last_exc}",
            rule="inference-unreachable")

    results: list[Detection] = []
    with client_factory() as client:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            for dets in pool.map(lambda fr: fetch(client, fr), frames):
                results.extend(dets)
    return sort_detections(results)


def _parse_response(frame: FrameRef, resp: httpx.Response) -> list[Detection]:
    excerpt = resp.text[:200]
    try:
        records = resp.json()
    except ValueError as exc:
        raise ValidationError(f"malformed inference response (not JSON): {excerpt!r}",
                              rule="inference-malformed") from exc
    if not isinstance(records, list):
        raise ValidationError(f"inference response must be a list: {excerpt!r}",
                              rule="inference-malformed")
    out = []
    for rec in records:
        try:
            out.append(Detection(
                clip_id=frame.clip_id,
                frame_index=frame.frame_index,
                box=BoundingBox(x=float(rec["x"]), y=float(rec["y"]),
                                w=float(rec["w"]), h=float(rec["h"])),
                label=str(rec["label"]),
                confidence=float(rec["confidence"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(
                f"malformed inference record {rec!r}: {exc}",
                rule="inference-malformed") from exc
    return out
