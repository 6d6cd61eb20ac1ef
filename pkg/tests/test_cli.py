import sys

import pytest
from click.testing import CliRunner

from helmetuse.annot import load_annotations, load_split, save_annotations
from helmetuse.cli import cli, main
from helmetuse.detector import NoiseProfile, save_detections, synth_detect
from helmetuse.sampler import load_manifest

from conftest import make_clip, make_track
from reference_data import (CLASS_RESULTS, SITE_HOURS, SITE_SAMPLED_CLIPS,
                            SITE_SPLITS)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def dataset(tmp_path):
    clips = []
    for site, n in (("siteA", 6), ("siteB", 4)):
        for i in range(n):
            clips.append(make_clip(f"{site}_{i}", site,
                                   tracks=(make_track("t1", "DHelmet"),)))
    ann = save_annotations(clips, tmp_path / "annotations.txt")
    dets = save_detections(synth_detect(clips, NoiseProfile()),
                           tmp_path / "detections.txt")
    return {"annotations": ann, "detections": dets, "clips": clips,
            "dir": tmp_path}


def write_sites(tmp_path, hours):
    path = tmp_path / "sites.txt"
    path.write_text("".join(f"{s} {h}\n" for s, h in sorted(hours.items())))
    return path


class TestSample:
    def test_published_quota(self, runner, tmp_path):
        # small per-site detection file would be huge at full scale; allocate
        # over real hours but give every candidate a zero score
        sites = write_sites(tmp_path, SITE_HOURS)
        det_path = tmp_path / "dets.txt"
        det_path.write_text("")
        out = tmp_path / "manifest.txt"
        result = runner.invoke(cli, ["sample", "--sites", str(sites),
                                     "--detections", str(det_path),
                                     "--quota", "1000", "--out", str(out)])
        assert result.exit_code == 0, result.output
        manifest = load_manifest(out)
        per_site = {}
        for c in manifest:
            per_site[c.site_id] = per_site.get(c.site_id, 0) + 1
        assert sum(per_site.values()) == 1000
        for site, expected in SITE_SAMPLED_CLIPS.items():
            assert abs(per_site[site] - expected) <= 1

    def test_zero_quota(self, runner, tmp_path):
        sites = write_sites(tmp_path, {"a": 1.0})
        det_path = tmp_path / "dets.txt"
        det_path.write_text("")
        out = tmp_path / "manifest.txt"
        result = runner.invoke(cli, ["sample", "--sites", str(sites),
                                     "--detections", str(det_path),
                                     "--quota", "0", "--out", str(out)])
        assert result.exit_code == 0
        assert out.read_text() == ""

    def test_missing_detections_exit_1(self, tmp_path, monkeypatch, capsys):
        sites = write_sites(tmp_path, {"a": 1.0})
        monkeypatch.setattr(sys, "argv", [
            "helmetuse", "sample", "--sites", str(sites),
            "--detections", str(tmp_path / "missing.txt"),
            "--quota", "1", "--out", str(tmp_path / "out.txt")])
        with pytest.raises(SystemExit) as exc_info:
            main()
        assert exc_info.value.code == 1
        assert "missing.txt" in capsys.readouterr().err

    def test_segment_command(self, runner, tmp_path):
        sites = write_sites(tmp_path, {"a": 1.0})  # 36,000 frames at 10 fps
        out = tmp_path / "candidates.txt"
        result = runner.invoke(cli, ["segment", "--sites", str(sites),
                                     "--out", str(out)])
        assert result.exit_code == 0
        assert len(load_manifest(out)) == 360


class TestSplit:
    def test_deterministic_outputs(self, runner, dataset):
        out1 = dataset["dir"] / "s1.txt"
        out2 = dataset["dir"] / "s2.txt"
        for out in (out1, out2):
            result = runner.invoke(cli, [
                "split", "--annotations", str(dataset["annotations"]),
                "--seed", "11", "--out", str(out)])
            assert result.exit_code == 0, result.output
        assert out1.read_bytes() == out2.read_bytes()

    def test_full_scale_totals(self, runner, tmp_path):
        clips = []
        for site, buckets in SITE_SPLITS.items():
            for i in range(sum(buckets)):
                clips.append(make_clip(f"{site}_{i:04d}", site))
        ann = save_annotations(clips, tmp_path / "a.txt")
        out = tmp_path / "split.txt"
        result = runner.invoke(cli, ["split", "--annotations", str(ann),
                                     "--seed", "3", "--out", str(out)])
        assert result.exit_code == 0
        split = load_split(out)
        counts = split.counts()
        n_sites = len(SITE_SPLITS)
        assert abs(counts["train"] - 636) <= n_sites
        assert abs(counts["val"] - 92) <= n_sites
        assert abs(counts["test"] - 182) <= n_sites

    def test_loso(self, runner, dataset):
        split_path = dataset["dir"] / "split.txt"
        runner.invoke(cli, ["split", "--annotations", str(dataset["annotations"]),
                            "--seed", "0", "--out", str(split_path)])
        out = dataset["dir"] / "loso.txt"
        result = runner.invoke(cli, [
            "loso", "--annotations", str(dataset["annotations"]),
            "--split", str(split_path), "--site", "siteA", "--out", str(out)])
        assert result.exit_code == 0, result.output
        loso_split = load_split(out)
        assert loso_split.excluded_sites == frozenset({"siteA"})
        for clip_id, bucket in loso_split.assignment.items():
            if clip_id.startswith("siteA"):
                assert bucket == "test"

    def test_loso_unknown_site_exit_2(self, dataset, monkeypatch, capsys):
        split_path = dataset["dir"] / "split.txt"
        CliRunner().invoke(cli, ["split", "--annotations",
                                 str(dataset["annotations"]),
                                 "--out", str(split_path)])
        monkeypatch.setattr(sys, "argv", [
            "helmetuse", "loso", "--annotations", str(dataset["annotations"]),
            "--split", str(split_path), "--site", "nowhere",
            "--out", str(dataset["dir"] / "x.txt")])
        with pytest.raises(SystemExit) as exc_info:
            main()
        assert exc_info.value.code == 2


class TestEvaluate:
    def test_zero_noise_identity(self, runner, dataset):
        result = runner.invoke(cli, [
            "evaluate", "--annotations", str(dataset["annotations"]),
            "--detections", str(dataset["detections"])])
        assert result.exit_code == 0, result.output
        assert result.output.strip().splitlines()[-1].endswith("100.0")

    def test_replay_published(self, runner, tmp_path):
        replay = tmp_path / "replay.txt"
        replay.write_text("".join(
            f"{label} {count} {'--' if ap is None else ap}\n"
            for label, count, ap in CLASS_RESULTS))
        result = runner.invoke(cli, ["evaluate", "--replay", str(replay)])
        assert result.exit_code == 0, result.output
        assert result.output.strip().splitlines()[-1].endswith("72.3")

    def test_replay_subset_flag(self, runner, tmp_path):
        replay = tmp_path / "replay.txt"
        replay.write_text("".join(
            f"{label} {count} {'--' if ap is None else ap}\n"
            for label, count, ap in CLASS_RESULTS))
        result = runner.invoke(cli, ["evaluate", "--replay", str(replay),
                                     "--classes", "max2riders"])
        assert result.exit_code == 0, result.output
        assert result.output.strip().splitlines()[-1].endswith("76.4")

    def test_bucket_requires_split(self, runner, dataset):
        split_path = dataset["dir"] / "split.txt"
        runner.invoke(cli, ["split", "--annotations", str(dataset["annotations"]),
                            "--out", str(split_path)])
        result = runner.invoke(cli, [
            "evaluate", "--annotations", str(dataset["annotations"]),
            "--detections", str(dataset["detections"]),
            "--split", str(split_path), "--bucket", "test"])
        assert result.exit_code == 0, result.output


class TestRatesAndCompare:
    def test_rates_outputs_series(self, runner, dataset):
        out = dataset["dir"] / "series.txt"
        result = runner.invoke(cli, [
            "rates", "--annotations", str(dataset["annotations"]),
            "--detections", str(dataset["detections"]), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "siteA" in out.read_text()

    def test_compare(self, runner, dataset):
        counts = dataset["dir"] / "counts.txt"
        counts.write_text("siteA 2019-05-02T06:00:00 10 0\n"
                          "siteB 2019-05-02T06:00:00 8 2\n")
        result = runner.invoke(cli, [
            "compare", "--annotations", str(dataset["annotations"]),
            "--detections", str(dataset["detections"]),
            "--human-counts", str(counts)])
        assert result.exit_code == 0, result.output
        assert "siteA" in result.output
        assert "summary" in result.output


class TestConfigFile:
    def test_flags_win_over_config(self, runner, dataset, tmp_path):
        config = tmp_path / "helmetuse.conf"
        config.write_text(f"annotations={dataset['annotations']}\nseed=1\n")
        out1 = tmp_path / "o1.txt"
        out2 = tmp_path / "o2.txt"
        r1 = runner.invoke(cli, ["--config", str(config), "split",
                                 "--out", str(out1)])
        r2 = runner.invoke(cli, ["--config", str(config), "split",
                                 "--seed", "1", "--out", str(out2)])
        assert r1.exit_code == 0 and r2.exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_required_exit_2(self, monkeypatch, capsys, tmp_path):
        monkeypatch.setattr(sys, "argv", ["helmetuse", "split",
                                          "--out", str(tmp_path / "o.txt")])
        with pytest.raises(SystemExit) as exc_info:
            main()
        assert exc_info.value.code == 2
        assert "annotations" in capsys.readouterr().err
