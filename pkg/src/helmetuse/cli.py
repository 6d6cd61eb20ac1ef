"""Command-line front door for the toolkit.

Exit codes: 0 success, 2 validation error (bad inputs, violated
invariants), 1 I/O error.  Every command is reproducible: the same
inputs and seed produce byte-identical outputs.

A plain-text config file (``key=value`` lines, keys matching the long
flag names with dashes as underscores) can supply defaults; explicit
flags win.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import annot, detector, metrics, rates, sampler
from .errors import ValidationError


def load_config(path: str | Path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(
                    f"config line {lineno} is not key=value: {line!r}",
                    rule="config-syntax")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


class Settings:
    """Flag values with config-file fallback."""

    def __init__(self, config_path: str | None):
        self.values = load_config(config_path) if config_path else {}

    def get(self, key: str, flag_value, default=None, convert=str):
        if flag_value is not None:
            return flag_value
        if key in self.values:
            return convert(self.values[key])
        return default


pass_settings = click.make_pass_decorator(Settings)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="key=value config file; flags take precedence")
@click.pass_context
def cli(ctx, config_path):
    ctx.obj = Settings(config_path)


def _require(settings: Settings, key: str, flag_value, convert=str):
    value = settings.get(key, flag_value, convert=convert)
    if value is None:
        raise ValidationError(f"missing required option --{key.replace('_', '-')} "
                              f"(or config key {key})", rule="missing-option")
    return value


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValidationError("ratios must be three comma-separated numbers",
                              rule="ratio-arity")
    return tuple(parts)  # type: ignore[return-value]


@cli.command()
@click.option("--sites", "sites_path", type=click.Path(), default=None,
              help="sites file: site_id hours per line")
@click.option("--fps", type=float, default=None)
@click.option("--clip-len", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@pass_settings
def segment(settings, sites_path, fps, clip_len, out_path):
    """Cut each site's timeline into unscored fixed-length candidates."""
    sites_path = _require(settings, "sites", sites_path)
    fps = settings.get("fps", fps, default=10.0, convert=float)
    clip_len = settings.get("clip_len", clip_len, default=sampler.CLIP_LEN,
                            convert=int)
    out_path = _require(settings, "out", out_path)
    hours = sampler.load_site_hours(sites_path)
    candidates = []
    for site_id in sorted(hours):
        total_frames = int(hours[site_id] * 3600 * fps)
        candidates.extend(sampler.segment(site_id, total_frames, clip_len))
    sampler.save_manifest(candidates, out_path)
    click.echo(f"{len(candidates)} candidates -> {out_path}")


@cli.command()
@click.option("--sites", "sites_path", type=click.Path(), default=None)
@click.option("--detections", "detections_path", type=click.Path(), default=None)
@click.option("--quota", type=int, default=None)
@click.option("--fps", type=float, default=None)
@click.option("--clip-len", type=int, default=None)
@click.option("--exclude-site", "excluded", multiple=True,
              help="drop a site before allocation (repeatable)")
@click.option("--out", "out_path", type=click.Path(), default=None)
@pass_settings
def sample(settings, sites_path, detections_path, quota, fps, clip_len,
           excluded, out_path):
    """Segment, score, apportion per site, and select top clips."""
    sites_path = _require(settings, "sites", sites_path)
    detections_path = _require(settings, "detections", detections_path)
    quota = _require(settings, "quota", quota, convert=int)
    fps = settings.get("fps", fps, default=10.0, convert=float)
    clip_len = settings.get("clip_len", clip_len, default=sampler.CLIP_LEN,
                            convert=int)
    out_path = _require(settings, "out", out_path)
    hours = sampler.load_site_hours(sites_path)
    for site in excluded:
        hours.pop(site, None)
    dets = detector.load_detections(detections_path)
    candidates = []
    for site_id in sorted(hours):
        total_frames = int(hours[site_id] * 3600 * fps)
        candidates.extend(sampler.segment(site_id, total_frames, clip_len))
    scored = sampler.score(candidates, dets, clip_len)
    allocation = sampler.allocate(hours, quota)
    selection = sampler.select(scored, allocation)
    sampler.save_manifest(selection, out_path)
    click.echo(f"{len(selection)} clips selected -> {out_path}")


@cli.command()
@click.option("--annotations", "annotations_path", type=click.Path(), default=None)
@click.option("--ratios", default=None, help="e.g. 0.7,0.1,0.2")
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@pass_settings
def split(settings, annotations_path, ratios, seed, out_path):
    """Per-site stratified train/val/test split."""
    annotations_path = _require(settings, "annotations", annotations_path)
    ratios = _parse_ratios(settings.get("ratios", ratios, default="0.7,0.1,0.2"))
    seed = settings.get("seed", seed, default=0, convert=int)
    out_path = _require(settings, "out", out_path)
    clips = annot.load_annotations(annotations_path)
    result = annot.make_split(clips, ratios=ratios, seed=seed)
    annot.save_split(result, out_path)
    counts = result.counts()
    click.echo(f"train={counts['train']} val={counts['val']} "
               f"test={counts['test']} -> {out_path}")


@cli.command()
@click.option("--annotations", "annotations_path", type=click.Path(), default=None)
@click.option("--split", "split_path", type=click.Path(), default=None)
@click.option("--site", default=None, help="site to leave out of train/val")
@click.option("--out", "out_path", type=click.Path(), default=None)
@pass_settings
def loso(settings, annotations_path, split_path, site, out_path):
    """Leave-site-out: drop one site's clips from train and validation."""
    annotations_path = _require(settings, "annotations", annotations_path)
    split_path = _require(settings, "split", split_path)
    site = _require(settings, "site", site)
    out_path = _require(settings, "out", out_path)
    clips = annot.load_annotations(annotations_path)
    base = annot.load_split(split_path)
    result = annot.leave_site_out(base, clips, site)
    annot.save_split(result, out_path)
    counts = result.counts()
    click.echo(f"train={counts['train']} val={counts['val']} "
               f"test={counts['test']} (excluded {site}) -> {out_path}")


@cli.command()
@click.option("--annotations", "annotations_path", type=click.Path(), default=None)
@click.option("--detections", "detections_path", type=click.Path(), default=None)
@click.option("--split", "split_path", type=click.Path(), default=None)
@click.option("--bucket", type=click.Choice(annot.BUCKETS), default=None)
@click.option("--iou-threshold", type=float, default=None)
@click.option("--classes", "classes_spec", default=None,
              help="all, max2riders, or a comma-separated label list")
@click.option("--replay", "replay_path", type=click.Path(), default=None,
              help="recompute weighted mAP from a 'label count ap_percent' file")
@click.option("--out", "out_path", type=click.Path(), default=None)
@pass_settings
def evaluate(settings, annotations_path, detections_path, split_path, bucket,
             iou_threshold, classes_spec, replay_path, out_path):
    """Per-class AP report and weighted mAP for a split bucket."""
    classes_spec = settings.get("classes", classes_spec, default="all")
    keep = _class_filter(classes_spec)
    replay_path = settings.get("replay", replay_path)
    if replay_path is not None:
        table = _replay(replay_path, keep)
    else:
        annotations_path = _require(settings, "annotations", annotations_path)
        detections_path = _require(settings, "detections", detections_path)
        iou_threshold = settings.get("iou_threshold", iou_threshold,
                                     default=0.5, convert=float)
        clips = annot.load_annotations(annotations_path)
        dets = detector.load_detections(detections_path)
        clip_ids = None
        bucket = settings.get("bucket", bucket)
        if bucket is not None:
            split_path = _require(settings, "split", split_path)
            clip_ids = metrics.split_bucket_ids(annot.load_split(split_path),
                                                bucket)
        report = metrics.evaluate(clips, dets, clip_ids=clip_ids,
                                  iou_threshold=iou_threshold,
                                  class_filter=keep)
        table = report.to_table()
    out_path = settings.get("out", out_path)
    if out_path:
        annot.atomic_write_text(Path(out_path), table)
        click.echo(f"report -> {out_path}")
    else:
        click.echo(table, nl=False)


def _class_filter(spec: str):
    if spec in metrics.CLASS_FILTERS:
        return metrics.CLASS_FILTERS[spec]
    allowed = set(spec.split(","))
    return lambda label: label in allowed


def _replay(path: str, keep) -> str:
    aps: dict[str, float | None] = {}
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(" ")
            if len(fields) != 3:
                raise ValidationError(
                    f"replay line {lineno} needs: label count ap_percent",
                    rule="replay-syntax")
            label, count, ap = fields
            counts[label] = int(count)
            aps[label] = None if ap == "--" else float(ap) / 100.0
    aps = {l: v for l, v in aps.items() if keep(l)}
    counts = {l: v for l, v in counts.items() if keep(l)}
    wmap = metrics.weighted_map(aps, counts)
    lines = ["class\tinstances\tap_percent"]
    for label in sorted(counts, key=lambda l: (-counts[l], l)):
        ap = f"{100 * aps[label]:.1f}" if aps[label] is not None else "--"
        lines.append(f"{label}\t{counts[label]}\t{ap}")
    lines.append(f"weighted_map\t\t{100 * wmap:.1f}")
    return "\n".join(lines) + "\n"


@cli.command("rates")
@click.option("--annotations", "annotations_path", type=click.Path(), default=None)
@click.option("--detections", "detections_path", type=click.Path(), default=None)
@click.option("--confidence", type=float, default=None)
@click.option("--dedupe-iou", type=float, default=None)
@click.option("--bucketing", type=click.Choice(sorted(rates.BUCKETING)),
              default=None)
@click.option("--motorcycle-weighted", is_flag=True, default=False,
              help="weight by motorcycles (driver helmet) instead of riders")
@click.option("--chart", "chart_path", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@pass_settings
def rates_cmd(settings, annotations_path, detections_path, confidence,
              dedupe_iou, bucketing, motorcycle_weighted, chart_path, out_path):
    """Aggregate detections into per-site helmet-use rate series."""
    annotations_path = _require(settings, "annotations", annotations_path)
    detections_path = _require(settings, "detections", detections_path)
    confidence = settings.get("confidence", confidence, default=0.5, convert=float)
    dedupe_iou = settings.get("dedupe_iou", dedupe_iou, default=0.5, convert=float)
    bucketing = settings.get("bucketing", bucketing, default="hour")
    clips = annot.load_annotations(annotations_path)
    dets = detector.load_detections(detections_path)
    series = rates.aggregate(dets, clips, confidence_threshold=confidence,
                             dedupe_iou=dedupe_iou, bucketing=bucketing,
                             rider_weighted=not motorcycle_weighted)
    out_path = settings.get("out", out_path)
    if out_path:
        rates.save_series(series, out_path)
        click.echo(f"series -> {out_path}")
    else:
        click.echo(rates.series_table(series), nl=False)
    if chart_path:
        rates.render_chart(series, chart_path)
        click.echo(f"chart -> {chart_path}")


@cli.command()
@click.option("--annotations", "annotations_path", type=click.Path(), default=None)
@click.option("--detections", "detections_path", type=click.Path(), default=None)
@click.option("--human-counts", "counts_path", type=click.Path(), default=None)
@click.option("--confidence", type=float, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@pass_settings
def compare(settings, annotations_path, detections_path, counts_path,
            confidence, out_path):
    """Compare machine rate series against human-observer counts per site."""
    annotations_path = _require(settings, "annotations", annotations_path)
    detections_path = _require(settings, "detections", detections_path)
    counts_path = _require(settings, "human_counts", counts_path)
    confidence = settings.get("confidence", confidence, default=0.5, convert=float)
    clips = annot.load_annotations(annotations_path)
    dets = detector.load_detections(detections_path)
    machine = rates.aggregate(dets, clips, confidence_threshold=confidence)
    human = rates.human_series(counts_path)
    report = rates.comparison_report(human, machine)
    out_path = settings.get("out", out_path)
    if out_path:
        annot.atomic_write_text(Path(out_path), report.to_table())
        click.echo(f"comparison -> {out_path}")
    else:
        click.echo(report.to_table(), nl=False)


@cli.command()
@click.option("--annotations", "annotations_path", type=click.Path(), default=None)
@click.option("--frames-dir", type=click.Path(), default=None)
@click.option("--detections", "detections_path", type=click.Path(), default=None)
@click.option("--ui-dir", type=click.Path(), default=None,
              help="directory with the built annotation UI to serve at /")
@click.option("--port", type=int, default=None)
@pass_settings
def serve(settings, annotations_path, frames_dir, detections_path, ui_dir, port):
    """Run the local annotation/review service."""
    import uvicorn

    from .server import create_app

    annotations_path = _require(settings, "annotations", annotations_path)
    frames_dir = settings.get("frames_dir", frames_dir)
    detections_path = settings.get("detections", detections_path)
    ui_dir = settings.get("ui_dir", ui_dir)
    port = settings.get("port", port, default=8571, convert=int)
    if not 0 < port < 65536:
        raise ValidationError(f"invalid port {port}", rule="port-range")
    app = create_app(annotations_path, frames_dir=frames_dir,
                     detections_path=detections_path, ui_dir=ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port)


def main():
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(130)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(2)
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
