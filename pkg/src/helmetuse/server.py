"""Local HTTP service backing the annotation UI.

Endpoints:
  GET  /clips                       list clip metadata
  GET  /clips/{id}/frames/{index}   frame image from the frames directory
  GET  /clips/{id}/tracks           ground-truth tracks for a clip
  PUT  /clips/{id}/tracks           replace a clip's tracks (validated, atomic)
  GET  /taxonomy                    class enumeration for the encoding form
  GET  /clips/{id}/review           GT vs. detections with TP/FP/FN status

Invariant violations surface as 422 with a machine-readable ``rule`` id;
unknown clips or frames are 404.  Writes are serialized per clip and the
annotation file is replaced atomically, so a crashed put never corrupts
the store.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .annot import BoundingBox, Clip, Track, load_annotations, save_annotations
from .detector import Detection, load_detections
from .errors import ValidationError
from .metrics import gt_boxes_of, match
from .taxonomy import enumerate_classes

FRAME_SUFFIXES = (".jpg", ".jpeg", ".png")


class AnnotationStore:
    """In-memory clip store persisted to one annotation file.

    Reads are lock-free on immutable snapshots; writes take a per-clip
    lock plus a store-wide lock around the file replacement.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        clips = load_annotations(self.path) if self.path.exists() else []
        self._clips: dict[str, Clip] = {c.clip_id: c for c in clips}
        self._file_lock = threading.Lock()
        self._clip_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def list_clips(self) -> list[Clip]:
        return sorted(self._clips.values(), key=lambda c: c.clip_id)

    def get(self, clip_id: str) -> Clip | None:
        return self._clips.get(clip_id)

    def _lock_for(self, clip_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._clip_locks.setdefault(clip_id, threading.Lock())

    def put_tracks(self, clip_id: str, tracks: tuple[Track, ...]) -> Clip:
        with self._lock_for(clip_id):
            old = self._clips.get(clip_id)
            if old is None:
                raise KeyError(clip_id)
            from dataclasses import replace
            updated = replace(old, tracks=tracks)  # re-runs clip validation
            with self._file_lock:
                self._clips[clip_id] = updated
                save_annotations(self._clips.values(), self.path)
            return updated


def clip_meta(clip: Clip) -> dict[str, Any]:
    return {
        "clip_id": clip.clip_id,
        "site_id": clip.site_id,
        "start_timestamp": clip.start_timestamp.isoformat(),
        "fps": clip.fps,
        "frame_count": clip.frame_count,
        "width": clip.resolution[0],
        "height": clip.resolution[1],
        "track_count": len(clip.tracks),
    }


def track_payload(track: Track) -> dict[str, Any]:
    return {
        "track_id": track.track_id,
        "label": track.label,
        "boxes": [
            {"frame": fi, "x": b.x, "y": b.y, "w": b.w, "h": b.h}
            for fi, b in sorted(track.boxes.items())
        ],
    }


def parse_track(data: dict[str, Any]) -> Track:
    try:
        boxes = {
            int(b["frame"]): BoundingBox(x=float(b["x"]), y=float(b["y"]),
                                         w=float(b["w"]), h=float(b["h"]))
            for b in data["boxes"]
        }
        return Track(track_id=str(data["track_id"]), label=str(data["label"]),
                     boxes=boxes)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed track payload: {exc}",
                              rule="malformed-track") from exc


def create_app(annotations_path: str | Path,
               frames_dir: str | Path | None = None,
               detections_path: str | Path | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    store = AnnotationStore(annotations_path)
    detections: list[Detection] = (
        load_detections(detections_path) if detections_path else [])
    frames_root = Path(frames_dir) if frames_dir else None

    app = FastAPI(title="helmetuse annotation service")

    @app.exception_handler(ValidationError)
    async def on_validation_error(request: Request, exc: ValidationError):
        return JSONResponse(status_code=422,
                            content={"rule": exc.rule, "detail": str(exc)})

    @app.get("/clips")
    def clips():
        return [clip_meta(c) for c in store.list_clips()]

    @app.get("/clips/{clip_id}/frames/{index}")
    def frame(clip_id: str, index: int):
        clip = store.get(clip_id)
        if clip is None:
            return JSONResponse(status_code=404,
                                content={"detail": f"unknown clip {clip_id!r}"})
        if not 0 <= index < clip.frame_count or frames_root is None:
            return JSONResponse(status_code=404,
                                content={"detail": f"no frame {index} for {clip_id}"})
        for suffix in FRAME_SUFFIXES:
            for name in (f"{index:05d}{suffix}", f"{index}{suffix}"):
                path = frames_root / clip_id / name
                if path.exists():
                    return FileResponse(path)
        return JSONResponse(status_code=404,
                            content={"detail": f"frame image missing for "
                                               f"{clip_id}/{index}"})

    @app.get("/clips/{clip_id}/tracks")
    def get_tracks(clip_id: str):
        clip = store.get(clip_id)
        if clip is None:
            return JSONResponse(status_code=404,
                                content={"detail": f"unknown clip {clip_id!r}"})
        return {"clip_id": clip_id,
                "tracks": [track_payload(t)
                           for t in sorted(clip.tracks, key=lambda t: t.track_id)]}

    @app.put("/clips/{clip_id}/tracks")
    def put_tracks(clip_id: str, body: dict):
        tracks = tuple(parse_track(t) for t in body.get("tracks", []))
        try:
            updated = store.put_tracks(clip_id, tracks)
        except KeyError:
            return JSONResponse(status_code=404,
                                content={"detail": f"unknown clip {clip_id!r}"})
        return {"clip_id": clip_id,
                "tracks": [track_payload(t)
                           for t in sorted(updated.tracks,
                                           key=lambda t: t.track_id)]}

    @app.get("/taxonomy")
    def taxonomy(max_riders: int = 5):
        return [
            {
                "label": c.label,
                "riders": c.config.rider_count,
                "helmeted": c.config.helmeted_count,
                "positions": [{"position": p.value, "helmet": helmet}
                              for p, helmet in c.config.riders],
            }
            for c in enumerate_classes(max_riders)
        ]

    @app.get("/clips/{clip_id}/review")
    def review(clip_id: str, iou_threshold: float = 0.5):
        clip = store.get(clip_id)
        if clip is None:
            return JSONResponse(status_code=404,
                                content={"detail": f"unknown clip {clip_id!r}"})
        clip_dets = [d for d in detections if d.clip_id == clip_id]
        gt_by_class = gt_boxes_of([clip])
        det_by_class: dict[str, list[Detection]] = {}
        for d in clip_dets:
            det_by_class.setdefault(d.label, []).append(d)
        gt_items = []
        det_items = []
        for label in sorted(set(gt_by_class) | set(det_by_class)):
            gts = gt_by_class.get(label, [])
            result = match(gts, det_by_class.get(label, []), iou_threshold)
            matched = {o.matched for o in result.outcomes if o.is_tp}
            for g in gts:
                gt_items.append({
                    "track_id": g.track_id, "frame": g.frame_index,
                    "label": label,
                    "x": g.box.x, "y": g.box.y, "w": g.box.w, "h": g.box.h,
                    "status": "matched" if g in matched else "fn"})
            for o in result.outcomes:
                d = o.detection
                det_items.append({
                    "frame": d.frame_index, "label": label,
                    "x": d.box.x, "y": d.box.y, "w": d.box.w, "h": d.box.h,
                    "confidence": d.confidence,
                    "status": "tp" if o.is_tp else "fp"})
        return {"clip_id": clip_id, "ground_truth": gt_items,
                "detections": det_items}

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
