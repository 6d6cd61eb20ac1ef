"""Acceptance suite: one test (and one printed PASS/FAIL line) per criterion.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines.  Each criterion is verified at its stated tolerance; anything that
needs the original camera corpus or a trained model is reproduced on
synthetic data with known ground truth instead (see the final test).
"""

import math
import random
from datetime import timedelta
from fractions import Fraction

import pytest

from helmetuse.annot import apportion, make_split, save_split
from helmetuse.detector import NoiseProfile, synth_detect
from helmetuse.metrics import (evaluate, gt_boxes_of, match, max_two_riders,
                               weighted_map)
from helmetuse.rates import aggregate
from helmetuse.sampler import allocate
from helmetuse.taxonomy import decode, encode, enumerate_classes

from conftest import T0, make_clip, make_track
from reference_data import (CLASS_RESULTS, PUBLISHED_SUBSET_WEIGHTED_MAP,
                            PUBLISHED_WEIGHTED_MAP, SAMPLING_QUOTA,
                            SITE_HOURS, SITE_SAMPLED_CLIPS, SITE_SPLITS,
                            SPLIT_TOTALS, SUBSET_CLASS_NUMBERS)
from test_metrics import oracle_evaluate, random_eval_instance, tracks_to_clip


def verdict(name, ok):
    print(f"\n{'PASS' if ok else 'FAIL'}: {name}")
    assert ok, name


def replay_inputs():
    aps = {label: ap / 100.0 for label, _, ap in CLASS_RESULTS
           if ap is not None}
    counts = {label: count for label, count, ap in CLASS_RESULTS
              if ap is not None}
    return aps, counts


def test_weighted_map_replay():
    aps, counts = replay_inputs()
    result = 100.0 * weighted_map(aps, counts)
    verdict("weighted-mAP replay reproduces published footer within 0.05",
            abs(result - PUBLISHED_WEIGHTED_MAP) <= 0.05)


def test_subset_replay():
    aps, counts = replay_inputs()
    subset = [CLASS_RESULTS[n - 1][0] for n in SUBSET_CLASS_NUMBERS]
    assert all(max_two_riders(label) for label in subset)
    result = 100.0 * weighted_map({l: aps[l] for l in subset},
                                  {l: counts[l] for l in subset})
    verdict("two-rider-subset replay reproduces published value within 0.1",
            abs(result - PUBLISHED_SUBSET_WEIGHTED_MAP) <= 0.1)


def test_sampler_apportionment():
    alloc = allocate(SITE_HOURS, SAMPLING_QUOTA)
    ok = (sum(alloc.values()) == SAMPLING_QUOTA
          and all(abs(alloc[s] - n) <= 1 for s, n in SITE_SAMPLED_CLIPS.items()))
    verdict("per-site clip quotas match the published column within 1 "
            "for all 13 sites", ok)


def test_split_stratification():
    clips = []
    for site, buckets in sorted(SITE_SPLITS.items()):
        for i in range(sum(buckets)):
            clips.append(make_clip(f"{site}_{i:04d}", site))
    assert len(clips) == sum(SPLIT_TOTALS)

    first = make_split(clips, seed=17)
    second = make_split(clips, seed=17)
    deterministic = first.assignment == second.assignment

    stratified = True
    for site, buckets in SITE_SPLITS.items():
        total = sum(buckets)
        target = apportion([Fraction(7, 10), Fraction(1, 10), Fraction(2, 10)],
                           total)
        got = [0, 0, 0]
        for clip in clips:
            if clip.site_id == site:
                got[("train", "val", "test").index(
                    first.assignment[clip.clip_id])] += 1
        if any(abs(g - t) > 1 for g, t in zip(got, target)):
            stratified = False
    verdict("910-clip split is per-site 70/10/20 within 1 and "
            "deterministic under a fixed seed", deterministic and stratified)


def test_metrics_oracle_equivalence():
    ok = True
    for seed in range(1000):
        rng = random.Random(seed)
        tracks, dets = random_eval_instance(rng)
        report = evaluate([tracks_to_clip(tracks)], dets)
        oracle_aps, oracle_wmap = oracle_evaluate(tracks, dets)
        for label, expected in oracle_aps.items():
            if abs(report.per_class[label].ap - expected) > 1e-12:
                ok = False
        if abs(report.weighted_map - oracle_wmap) > 1e-12:
            ok = False
    verdict("evaluation matches a brute-force PR-curve reference on "
            "1,000 random instances within 1e-12", ok)


def test_end_to_end_identity():
    labels = ["DHelmet", "DNoHelmetP1Helmet", "DHelmetP1NoHelmetP2Helmet",
              "DNoHelmet", "DHelmetP0NoHelmetP1Helmet"]
    clips = []
    for i in range(12):
        tracks = tuple(
            make_track(f"t{j}", labels[(i + j) % len(labels)], x=400.0 * j)
            for j in range(1 + i % 3))
        clips.append(make_clip(f"c{i:02d}", f"site{i % 2}",
                               tracks=tracks,
                               start=T0 + timedelta(minutes=7 * i)))
    dets = synth_detect(clips, NoiseProfile())

    report = evaluate(clips, dets)
    map_identity = report.weighted_map == 1.0

    # independent integer tally of the ground-truth rider-weighted rate,
    # bucketed the same way aggregate buckets machine detections
    expected = {}
    for clip in clips:
        for track in clip.tracks:
            config = decode(track.label)
            for fi in track.boxes:
                start = clip.frame_time(fi).replace(minute=0, second=0,
                                                    microsecond=0)
                slot = expected.setdefault((clip.site_id, start), [0, 0])
                slot[0] += config.rider_count
                slot[1] += config.helmeted_count

    rate_identity = True
    for series in aggregate(dets, clips):
        for bucket in series.buckets:
            riders, helmeted = expected[(series.site_id, bucket.start)]
            if bucket.rate != 100.0 * helmeted / riders:
                rate_identity = False
    verdict("zero-noise detections give weighted mAP exactly 1.0 and the "
            "exact ground-truth rider-weighted rate",
            map_identity and rate_identity)


def test_noise_response():
    clips = [make_clip(f"c{i:03d}") for i in range(100)]  # 10,000 boxes
    n = 10_000
    ok = True
    for j, p in enumerate((0.1, 0.3, 0.5)):
        dets = synth_detect(clips, NoiseProfile(miss_rate=p, rng_seed=100 + j))
        gts = [g for boxes in gt_boxes_of(clips).values() for g in boxes]
        result = match(gts, dets)
        recall = result.tp_count / n
        sigma = math.sqrt(p * (1 - p) / n)
        if abs(recall - (1 - p)) > 3 * sigma:
            ok = False
    verdict("measured recall under miss rates 0.1/0.3/0.5 stays within "
            "3 binomial sigma of the injected rate on 10,000 boxes", ok)


def test_taxonomy_exhaustiveness():
    universe = {cls.label for cls in enumerate_classes(5)}
    ok = True
    for label, _, _ in CLASS_RESULTS:
        if encode(decode(label)) != label or label not in universe:
            ok = False
    verdict("all 36 published class patterns round-trip and are contained "
            "in the 5-rider enumeration", ok)


def test_field_scale_results_out_of_desk_scope():
    """The published field results cannot be recomputed here.

    The trained detector's 72.3% test score from raw video, its 14 fps
    inference speed, and the field deviation bounds (-4.4/+2.07 with the
    site in training, -8.13/+9.43 held out) all require the original
    multi-terabyte camera corpus and a trained model, neither of which is
    available at desk scale.  The same computation paths are exercised
    instead on synthetic data with known ground truth: the identity and
    noise-response tests above drive detection, matching, AP, weighted
    mAP, and rate aggregation end to end, and the replay tests pin the
    arithmetic to the published numbers.
    """
    verdict("field-scale results documented as out of desk scope; their "
            "computation paths covered by synthetic identity/noise tests",
            True)
