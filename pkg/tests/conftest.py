import sys
from datetime import datetime
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helmetuse.annot import BoundingBox, Clip, Track

T0 = datetime(2019, 5, 2, 6, 0, 0)


def make_track(track_id="t1", label="DHelmet", frames=range(100),
               x=100.0, y=200.0, w=60.0, h=80.0, dx=0.0):
    boxes = {fi: BoundingBox(x + dx * fi, y, w, h) for fi in frames}
    return Track(track_id=track_id, label=label, boxes=boxes)


def make_clip(clip_id="c1", site_id="siteA", tracks=None, frame_count=100,
              fps=10.0, start=T0, resolution=(1920, 1080)):
    if tracks is None:
        tracks = (make_track(),)
    return Clip(clip_id=clip_id, site_id=site_id, start_timestamp=start,
                fps=fps, frame_count=frame_count, resolution=resolution,
                tracks=tuple(tracks))


@pytest.fixture
def simple_clip():
    return make_clip()
