"""Command-line entry point wiring all pipeline stages.

Commands: seqlabel synth | sequence | campseudo | merge | metrics | serve.

Exit codes: 0 ok, 1 I/O failure, 2 validation failure, 3 partial stage
failure, 4 missing annotation, 5 empty evaluation. Fatal errors print one
machine-readable JSON line on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import errors as E
from .campseudo import CrfConfig, ThresholdConfig, refine_crf, threshold_cam
from .core.images import image_size, load_rgb
from .core.manifest import load_manifest
from .core.maskio import encode_mask_png, read_mask
from .core.scoremapio import read_scoremap
from .core.types import DatasetManifest
from .sequencer import (
    SequencerConfig,
    build_sequences,
    extract_features,
    load_sequence_set,
    write_sequence_set,
)
from .synthgen import SynthConfig, generate_dataset
from .workspace import (
    Workspace,
    annotations_from_ground_truth,
    atomic_write_bytes,
    atomic_write_json,
    evaluation_doc,
    load_annotation,
    propagate_and_store,
)

log = logging.getLogger("seqlabel")

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_PARTIAL = 3
EXIT_MISSING_ANNOTATION = 4
EXIT_EMPTY_EVALUATION = 5

_IO_ERRORS = (E.MissingFile, E.IoFailure, E.UndecodableImage, E.MissingFeatureFile)
_VALIDATION_ERRORS = (
    E.MalformedManifest,
    E.InvariantViolation,
    E.ConfigInvariantViolation,
    E.ValueOutOfRange,
    E.UnsupportedPng,
    E.BadMagic,
    E.TruncatedFile,
    E.NonFiniteValue,
    E.DimensionMismatch,
    E.EmptyLabelSet,
    E.AnnotationHasIgnorePixels,
    E.WorkspaceLocked,
)
_EMPTY_ERRORS = (E.NoOverlap, E.NoPixels, E.NoScorableClass)


class _JsonLogFormatter(logging.Formatter):
    def format(self, record):
        doc = {"level": record.levelname.lower(), "message": record.getMessage()}
        if record.args and isinstance(record.args, dict):
            doc.update(record.args)
        return json.dumps(doc, sort_keys=True)


def _setup_logging(fmt: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    if fmt == "json":
        handler.setFormatter(_JsonLogFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    root = logging.getLogger("seqlabel")
    root.handlers[:] = [handler]
    root.setLevel(logging.INFO)
    root.propagate = False


def _run_record(stage: str, config: dict, paths: dict, warnings: list[str], started: float) -> None:
    """Run records go to the log stream only; workspace files must stay
    byte-identical across reruns."""
    log.info(
        "stage complete",
        {
            "stage": stage,
            "config": config,
            "paths": paths,
            "warnings": warnings,
            "seconds": round(time.monotonic() - started, 3),
        },
    )


def _map_jobs(jobs: int, fn, items):
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _manifest_for(args) -> tuple[Workspace, DatasetManifest]:
    ws = Workspace(args.workspace)
    manifest_path = Path(args.manifest) if args.manifest else ws.manifest_path
    return ws, load_manifest(manifest_path)


def cmd_synth(args) -> int:
    started = time.monotonic()
    config = SynthConfig(
        subjects=args.subjects,
        classes_per_subject=args.classes_per_subject,
        timesteps=args.timesteps,
        image_size=args.image_size,
        decay_rate=args.decay_rate,
        jitter=args.jitter,
        cam_noise_sigma=args.cam_noise_sigma,
        cam_blur_sigma=args.cam_blur_sigma,
        abrupt_change_at=args.abrupt_change_at,
        seed=args.seed,
    )
    manifest = generate_dataset(config, args.workspace)
    print(f"generated {manifest.count} images over {config.subjects} subjects")
    _run_record("synth", vars(config).copy(), {"workspace": str(args.workspace)}, [], started)
    return EXIT_OK


def cmd_sequence(args) -> int:
    started = time.monotonic()
    ws, manifest = _manifest_for(args)
    config = SequencerConfig(
        distance=args.distance,
        split_threshold=args.split_threshold,
        feature_source=args.feature_source,
        histogram_bins=args.histogram_bins,
    )
    features = dict(
        zip(
            (rec.id for rec in manifest.images),
            _map_jobs(args.jobs, lambda rec: extract_features(rec, config), manifest.images),
        )
    )
    sset = build_sequences(manifest, features, config)
    ws.root.mkdir(parents=True, exist_ok=True)
    write_sequence_set(sset, ws.sequences_path)
    lines = [f"{seq.id} {seq.representative_id}" for seq in sset.sequences]
    ws.representatives_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    print(f"n={sset.n}")
    for seq in sset.sequences:
        print(f"{seq.id} size={len(seq.image_ids)} representative={seq.representative_id}")
    _run_record(
        "sequence",
        vars(config).copy(),
        {"sequences": str(ws.sequences_path)},
        [],
        started,
    )
    return EXIT_OK


def cmd_campseudo(args) -> int:
    started = time.monotonic()
    ws, manifest = _manifest_for(args)
    threshold_config = ThresholdConfig(
        fg_threshold=args.fg_threshold, bg_threshold=args.bg_threshold
    )
    crf_config = CrfConfig(
        iterations=args.iterations,
        spatial_weight=args.spatial_weight,
        spatial_sigma=args.spatial_sigma,
        bilateral_weight=args.bilateral_weight,
        bilateral_spatial_sigma=args.bilateral_spatial_sigma,
        bilateral_color_sigma=args.bilateral_color_sigma,
        downsample_max_side=args.downsample_max_side,
        keep_ignore=args.keep_ignore,
    )
    ws.campseudo_dir.mkdir(parents=True, exist_ok=True)

    skipped = [rec.id for rec in manifest.images if rec.scoremap_path is None]
    for image_id in skipped:
        log.warning("no score map for %s, skipped", image_id)
    todo = [rec for rec in manifest.images if rec.scoremap_path is not None]

    def process(rec):
        try:
            smap = read_scoremap(rec.scoremap_path)
            mask = threshold_cam(smap, rec.class_labels, threshold_config)
            if args.refine:
                mask = refine_crf(smap, load_rgb(rec.image_path), mask, crf_config)
            atomic_write_bytes(ws.campseudo_path(rec.id), encode_mask_png(mask))
            return None
        except E.SeqLabelError as exc:
            return (rec.id, f"{type(exc).__name__}: {exc}")

    with ws.writer_lock():
        failures = [r for r in _map_jobs(args.jobs, process, todo) if r is not None]
    for image_id, message in failures:
        log.error("campseudo failed for %s: %s", image_id, message)
    print(f"wrote {len(todo) - len(failures)} masks, skipped {len(skipped)}, failed {len(failures)}")
    _run_record(
        "campseudo",
        {**vars(threshold_config), **vars(crf_config), "refine": args.refine},
        {"output": str(ws.campseudo_dir)},
        [f"skipped {s}" for s in skipped],
        started,
    )
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_merge(args) -> int:
    started = time.monotonic()
    ws, manifest = _manifest_for(args)
    sequences = load_sequence_set(args.sequences) if args.sequences else ws.load_sequences()
    ws.ensure_layout()

    warnings: list[str] = []
    errors: dict[str, str] = {}

    def process(seq):
        if not ws.annotation_path(seq.id).is_file():
            return (seq.id, None, f"singleton sequence {seq.id} has no annotation, skipped")
        annotation = load_annotation(ws, seq.id, manifest.classes)
        rec = manifest.by_id(seq.representative_id)
        width, height = image_size(rec.image_path)
        if (annotation.width, annotation.height) != (width, height):
            raise E.DimensionMismatch(
                f"annotation for {seq.id} is {annotation.width}x{annotation.height}, "
                f"representative image is {width}x{height}"
            )
        result = propagate_and_store(
            ws,
            seq,
            annotation,
            manifest.classes,
            strict_class_set=args.strict_class_set,
            propagate_ignore=args.propagate_ignore,
        )
        return (seq.id, result, None)

    with ws.writer_lock():
        if args.annotations_from_gt:
            annotations_from_ground_truth(ws, manifest, sequences, noise=args.annotation_noise)

        required = [
            seq.id
            for seq in sequences.sequences
            if len(seq.image_ids) > 1 and not ws.annotation_path(seq.id).is_file()
        ]
        if required:
            raise E.MissingAnnotation(required)

        for seq_id, result, warning in _map_jobs(args.jobs, process, sequences.sequences):
            if warning:
                warnings.append(warning)
                log.warning("%s", warning)
                continue
            warnings.extend(result.warnings)
            errors.update(result.errors)

        if args.refine_merged:
            _refine_merged_masks(ws, manifest, args)

    for image_id, message in sorted(errors.items()):
        log.error("merge failed for %s: %s", image_id, message)
    print(f"merged masks for {sequences.n} sequences ({len(errors)} per-image failures)")
    _run_record(
        "merge",
        {
            "strict_class_set": args.strict_class_set,
            "propagate_ignore": args.propagate_ignore,
            "annotations_from_gt": args.annotations_from_gt,
            "annotation_noise": args.annotation_noise,
            "refine_merged": args.refine_merged,
        },
        {"output": str(ws.merged_dir)},
        warnings,
        started,
    )
    return EXIT_PARTIAL if errors else EXIT_OK


def _refine_merged_masks(ws: Workspace, manifest, args) -> None:
    """Order toggle: apply CRF refinement after the merge instead of (or in
    addition to) the CAM branch."""
    crf_config = CrfConfig(
        iterations=args.iterations,
        spatial_weight=args.spatial_weight,
        spatial_sigma=args.spatial_sigma,
        bilateral_weight=args.bilateral_weight,
        bilateral_spatial_sigma=args.bilateral_spatial_sigma,
        bilateral_color_sigma=args.bilateral_color_sigma,
        downsample_max_side=args.downsample_max_side,
        keep_ignore=args.keep_ignore,
    )
    for rec in manifest.images:
        path = ws.merged_path(rec.id)
        if rec.scoremap_path is None or not path.is_file():
            continue
        smap = read_scoremap(rec.scoremap_path)
        mask = read_mask(path, manifest.classes)
        refined = refine_crf(smap, load_rgb(rec.image_path), mask, crf_config)
        atomic_write_bytes(path, encode_mask_png(refined))


def cmd_metrics(args) -> int:
    started = time.monotonic()
    ws, manifest = _manifest_for(args)
    pred_dir = Path(args.pred_dir) if args.pred_dir else ws.merged_dir
    doc = evaluation_doc(
        manifest,
        pred_dir,
        include_background=args.include_background,
        pred_ignore_as=args.pred_ignore_as,
    )
    output = Path(args.output) if args.output else ws.metrics_report_path()
    output.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_json(output, doc)
    print(json.dumps(doc, indent=2, sort_keys=True))
    _run_record(
        "metrics",
        {"pred_ignore_as": args.pred_ignore_as, "include_background": args.include_background},
        {"pred_dir": str(pred_dir), "report": str(output)},
        [],
        started,
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.workspace, host=args.bind, port=args.port, ui_dir=args.ui_dir)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workspace", default=".", help="workspace directory")
    parser.add_argument("--manifest", default=None, help="manifest path (default: workspace/manifest.json)")
    parser.add_argument("--jobs", type=int, default=1, help="worker parallelism for per-image stages")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--log-format", choices=("json", "text"), default="text")


def _add_crf_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--iterations", type=int, default=5)
    parser.add_argument("--spatial-weight", type=float, default=3.0)
    parser.add_argument("--spatial-sigma", type=float, default=3.0)
    parser.add_argument("--bilateral-weight", type=float, default=4.0)
    parser.add_argument("--bilateral-spatial-sigma", type=float, default=32.0)
    parser.add_argument("--bilateral-color-sigma", type=float, default=13.0)
    parser.add_argument("--downsample-max-side", type=int, default=128)
    parser.add_argument("--keep-ignore", action=argparse.BooleanOptionalAction, default=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqlabel",
        description="Pseudo-pixel-level labels for evolving-content image datasets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    _add_common(p)
    p.add_argument("--subjects", type=int, default=2)
    p.add_argument("--classes-per-subject", type=int, default=2)
    p.add_argument("--timesteps", type=int, default=5)
    p.add_argument("--image-size", type=int, default=64)
    p.add_argument("--decay-rate", type=float, default=0.1)
    p.add_argument("--jitter", type=int, default=1)
    p.add_argument("--cam-noise-sigma", type=float, default=0.1)
    p.add_argument("--cam-blur-sigma", type=float, default=1.5)
    p.add_argument("--abrupt-change-at", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sequence", help="group images into sequences")
    _add_common(p)
    p.add_argument("--distance", choices=("cosine", "l1"), default="cosine")
    p.add_argument("--split-threshold", type=float, default=0.15)
    p.add_argument("--feature-source", choices=("histogram", "external_file"), default="histogram")
    p.add_argument("--histogram-bins", type=int, default=64)
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("campseudo", help="threshold score maps into CAM pseudo labels")
    _add_common(p)
    p.add_argument("--fg-threshold", type=float, default=0.30)
    p.add_argument("--bg-threshold", type=float, default=0.05)
    p.add_argument("--refine", action=argparse.BooleanOptionalAction, default=True,
                   help="apply dense-CRF refinement to the CAM branch")
    _add_crf_flags(p)
    p.set_defaults(func=cmd_campseudo)

    p = sub.add_parser("merge", help="merge annotations with CAM labels across sequences")
    _add_common(p)
    p.add_argument("--sequences", default=None, help="sequences.json path (default: workspace)")
    p.add_argument("--annotations-from-gt", action="store_true",
                   help="simulate annotations by copying representative ground truth")
    p.add_argument("--annotation-noise", type=int, default=0,
                   help="erode/dilate simulated annotations by N pixels")
    p.add_argument("--strict-class-set", action="store_true")
    p.add_argument("--propagate-ignore", action="store_true")
    p.add_argument("--refine-merged", action="store_true",
                   help="apply dense-CRF refinement after the merge instead of before")
    _add_crf_flags(p)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("metrics", help="evaluate predictions against ground truth")
    _add_common(p)
    p.add_argument("--pred-dir", default=None, help="prediction directory (default: workspace/merged)")
    p.add_argument("--pred-ignore-as", choices=("exclude", "background"), default="exclude")
    p.add_argument("--include-background", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--output", default=None, help="report path (default: workspace/reports/metrics.json)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    _add_common(p)
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--ui-dir", default=None, help="static annotator UI directory to mount at /ui/")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.log_format)
    try:
        return args.func(args)
    except E.MissingAnnotation as exc:
        _fail(exc)
        return EXIT_MISSING_ANNOTATION
    except _EMPTY_ERRORS as exc:
        _fail(exc)
        return EXIT_EMPTY_EVALUATION
    except _VALIDATION_ERRORS as exc:
        _fail(exc)
        return EXIT_VALIDATION
    except _IO_ERRORS as exc:
        _fail(exc)
        return EXIT_IO


def _fail(exc: Exception) -> None:
    sys.stderr.write(
        json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n"
    )


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
