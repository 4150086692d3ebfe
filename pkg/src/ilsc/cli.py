"""Batch command line for the speckle classification pipeline.

Exit codes: 0 success, 1 environment or I/O failure, 2 validation or usage
error.  ``--format machine`` prints ``key=value`` lines.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dataio
from .bayes import CLASS_NODE, Dataset, cross_validate, posterior, train
from .errors import ValidationError
from .speckle import SynthParams, speckle_contrast, two_class_corpus
from .texture import (ATTRIBUTE_NAMES, DEFAULT_SIDE, Band, SampleRegion, default_regions,
                      extract_features, locate_bright_spot)

EXIT_OK, EXIT_IO, EXIT_VALIDATION = 0, 1, 2


class UsageError(ValidationError):
    pass


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return dataio.format_number(value) if float(value).is_integer() else f"{float(value):.6g}"
    return str(value)


def _full(value) -> str:
    return dataio.format_number(value) if isinstance(value, (float, np.floating)) else str(value)


@contextmanager
def _executor():
    threads = os.environ.get("ILSC_THREADS")
    workers = max(1, int(threads)) if threads and threads.isdigit() else 1
    if workers == 1:
        yield None
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield pool


class Report:
    """Collects output so a run either writes everything or nothing."""

    def __init__(self, machine: bool):
        self.machine = machine
        self.buffer = io.StringIO()

    def text(self, line: str = ""):
        if not self.machine:
            self.buffer.write(line + "\n")

    def kv(self, key: str, value):
        if self.machine:
            self.buffer.write(f"{key}={_full(value)}\n")

    def emit(self, out):
        content = self.buffer.getvalue()
        if out:
            Path(out).write_text(content, encoding="utf-8")
        else:
            sys.stdout.write(content)


def _warn(message: str):
    print(f"warning: {message}", file=sys.stderr)


def _parse_overrides(text: str | None, base: SynthParams) -> SynthParams:
    if not text:
        return base
    keys = {"mean": "mean_intensity", "grain": "grain_size_px", "blur": "blur_radius_px",
            "width": "width", "height": "height"}
    changes = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in keys:
            raise UsageError(f"bad --params-diseased entry {item!r}; use key=value with keys {sorted(keys)}")
        try:
            changes[keys[key]] = int(value) if keys[key] in ("blur_radius_px", "width", "height") else float(value)
        except ValueError:
            raise UsageError(f"bad value in --params-diseased entry {item!r}") from None
    return replace(base, **changes)


def cmd_synth(args, report: Report):
    healthy = SynthParams(args.mean, args.grain, args.blur, 0, args.width, args.height)
    diseased = _parse_overrides(args.params_diseased, healthy)
    with _executor() as pool:
        corpus = two_class_corpus(healthy, diseased, args.n_per_class, args.seed, executor=pool)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for item in corpus:
        dataio.write_pgm(item.image, out_dir / item.name)
    manifest = out_dir / "manifest.tsv"
    dataio.write_manifest(corpus, manifest)

    report.text(f"wrote {len(corpus)} images and {manifest}")
    report.kv("images", len(corpus))
    report.kv("manifest", manifest)
    report.text(f"max clipped fraction {max(i.image.clipped_fraction for i in corpus):.4g}")
    for item in corpus:
        report.kv(f"clipped.{item.name}", item.image.clipped_fraction)


def cmd_contrast(args, report: Report):
    ks = []
    for i, name in enumerate(args.images):
        c = speckle_contrast(dataio.read_pgm(name))
        ks.append(c.k)
        report.text(f"{name}: mean={_fmt(c.mean)} std_dev={_fmt(c.std_dev)} k={_fmt(c.k)}")
        report.kv(f"image.{i}.path", name)
        report.kv(f"image.{i}.mean", c.mean)
        report.kv(f"image.{i}.std_dev", c.std_dev)
        report.kv(f"image.{i}.k", c.k)
    counts, edges = np.histogram(ks, bins=args.hist_bins, range=(0.0, max(1.0, max(ks))))
    for b, count in enumerate(counts):
        report.kv(f"hist.k.{b}", f"{_full(edges[b])}:{_full(edges[b + 1])}:{count}")


def _parse_region(text: str, side: int, band: Band) -> SampleRegion:
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--region expects X,Y, got {text!r}") from None
    return SampleRegion(x, y, side, band)


def cmd_features(args, report: Report):
    if not args.out:
        raise UsageError("features requires --out <feature CSV path>")
    if args.region and len(args.region) != 2:
        raise UsageError("--region must be given exactly twice (interior, then exterior)")
    with _executor() as pool:
        corpus = dataio.ingest_corpus(args.manifest, executor=pool)

    fixed = None
    if args.region:
        fixed = (_parse_region(args.region[0], args.side, Band.INTERIOR),
                 _parse_region(args.region[1], args.side, Band.EXTERIOR))

    rows, labels, errors = [], [], []
    for n, item in enumerate(corpus, start=1):
        try:
            regions = fixed or default_regions(item.image, locate_bright_spot(item.image), args.side)
            feats = extract_features(item.image, *regions, label=item.label)
        except ValidationError as exc:
            errors.append(f"row {n} ({item.name}): {exc}")
            continue
        rows.append(feats.values())
        labels.append(item.label)
    if errors:
        raise ValidationError("feature extraction failed:\n  " + "\n  ".join(errors))

    dataset = Dataset(np.array(rows), labels, ATTRIBUTE_NAMES)
    dataio.write_feature_csv(dataset, args.out)
    report.text(f"wrote {len(dataset)} feature rows to {args.out}")
    report.kv("rows", len(dataset))
    report.kv("features", args.out)


def _describe_model(net, report: Report):
    report.text(f"threshold t = {_fmt(net.threshold)} bits, bins = {net.n_bins}, alpha = {_fmt(net.alpha)}")
    report.text("selected attributes: " + (", ".join(net.selected_attributes) or "(none)"))
    report.text("edges: " + (", ".join(f"{a}->{b}" for a, b in net.edges) or "(none)"))
    report.text("I(attribute; Class) in bits:")
    for name, value in net.class_information.items():
        report.text(f"  {name:8s} {value:.6f}")
    report.kv("selected", ",".join(net.selected_attributes))
    report.kv("edges", ",".join(f"{a}->{b}" for a, b in net.edges))
    for name, value in net.class_information.items():
        report.kv(f"cmi.{name}.{CLASS_NODE}", value)
    for (a, b), value in net.pair_information.items():
        report.kv(f"cmi.{a}.{b}.given.{CLASS_NODE}", value)


def cmd_learn(args, report: Report):
    if not args.out:
        raise UsageError("learn requires --out <model path>")
    dataset = dataio.read_feature_csv(args.features)
    net = train(dataset, args.bins, args.t, args.alpha)
    if not net.edges:
        _warn("no attribute reached the threshold; prior-only classifier")
    dataio.save_model(net, args.out)
    _describe_model(net, report)
    report.text(f"model written to {args.out}")
    report.kv("model", args.out)


def cmd_classify(args, report: Report):
    net = dataio.load_model(args.model)
    dataset = dataio.read_feature_csv(args.features)
    hits = scored = 0
    for sid, x, label in zip(dataset.sample_ids, dataset.values, dataset.labels):
        probs = posterior(net, x)
        pred = net.class_values[int(np.argmax(probs))]
        dist = " ".join(f"P({c})={p:.6f}" for c, p in zip(net.class_values, probs))
        report.text(f"{sid}: predicted={pred} {dist} true={label}")
        report.kv(f"row.{sid}.predicted", pred)
        for c, p in zip(net.class_values, probs):
            report.kv(f"row.{sid}.posterior.{c}", float(p))
        if label in net.class_values:
            scored += 1
            hits += pred == label
    if scored:
        report.text(f"accuracy {hits}/{scored} = {hits / scored:.4f}")
        report.kv("accuracy", hits / scored)
        report.kv("correct", hits)
        report.kv("scored", scored)


def cmd_evaluate(args, report: Report):
    dataset = dataio.read_feature_csv(args.features)
    result = cross_validate(dataset, args.k, args.bins, args.t, args.alpha, args.seed)
    report.text(f"{args.k}-fold stratified CV, t = {_fmt(args.t)}, bins = {args.bins}, "
                f"alpha = {_fmt(args.alpha)}, seed = {args.seed}")
    report.text(f"accuracy {result.n_correct}/{len(dataset)} = {result.accuracy:.4f}")
    report.text("confusion (rows true, columns predicted): " + " ".join(result.class_values))
    for c, row in zip(result.class_values, result.confusion):
        report.text(f"  {c}: " + " ".join(str(int(v)) for v in row))
    for f, sel in enumerate(result.selected_per_fold):
        report.text(f"fold {f} selected: " + (", ".join(sel) or "(none)"))

    report.kv("accuracy", result.accuracy)
    report.kv("correct", result.n_correct)
    report.kv("rows", len(dataset))
    for i, t in enumerate(result.class_values):
        for j, p in enumerate(result.class_values):
            report.kv(f"confusion.{t}.{p}", int(result.confusion[i, j]))
    for f, sel in enumerate(result.selected_per_fold):
        report.kv(f"fold.{f}.selected", ",".join(sel))
    report.kv("folds", ",".join(str(int(v)) for v in result.folds))


def _float(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="reproducibility seed (u64)")
    common.add_argument("--out", help="report path; for features and learn, the CSV or model to write")
    common.add_argument("--format", choices=("text", "machine"), default="text")

    parser = argparse.ArgumentParser(prog="ilsc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a two-class synthetic speckle corpus")
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--mean", type=_float, default=60.0)
    p.add_argument("--grain", type=_float, default=2.0)
    p.add_argument("--blur", type=int, default=0)
    p.add_argument("--n-per-class", type=int, default=20)
    p.add_argument("--params-diseased", help="overrides for class 'd', e.g. 'blur=2,grain=3'")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("contrast", parents=[common], help="speckle contrast K per image")
    p.add_argument("images", nargs="+")
    p.add_argument("--hist-bins", type=int, default=10)
    p.set_defaults(func=cmd_contrast)

    p = sub.add_parser("features", parents=[common], help="texture features for a corpus manifest")
    p.add_argument("--manifest", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--spot-auto", action="store_true",
                       help="place sample windows from the detected bright spot (default)")
    group.add_argument("--region", action="append", metavar="X,Y",
                       help="window origin; give twice (interior, exterior)")
    p.add_argument("--side", type=int, default=DEFAULT_SIDE)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("learn", parents=[common], help="learn a network from a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--t", type=_float, default=0.1)
    p.add_argument("--bins", type=int, default=3)
    p.add_argument("--alpha", type=_float, default=1.0)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("classify", parents=[common], help="posterior class per feature row")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", parents=[common], help="stratified k-fold cross-validation")
    p.add_argument("--features", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--t", type=_float, default=0.1)
    p.add_argument("--bins", type=int, default=3)
    p.add_argument("--alpha", type=_float, default=1.0)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.seed < 0 or args.seed >= 2**64:
        parser.print_usage(sys.stderr)
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_VALIDATION

    report = Report(args.format == "machine")
    # learn and features use --out for their artifact; their report goes to stdout
    report_out = None if args.command in ("learn", "features") else args.out
    try:
        args.func(args, report)
        report.emit(report_out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
