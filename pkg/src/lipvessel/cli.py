"""
Command-line front end.

::

    lipvessel segment IMAGE [--fov MASK] [--reference REF] [options]
    lipvessel batch CONFIG [options]
    lipvessel eval PRED_DIR CONFIG [options]

Exit codes: 0 success, 1 usage, 2 I/O error, 3 pipeline failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import evaluation, fileio
from .segmentation import POLARITIES, PipelineParams, segment_vessels

log = logging.getLogger("lipvessel")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_PIPELINE = 0, 1, 2, 3

# flag name -> (PipelineParams field, type)
PARAM_FLAGS = {
    "fov-angle": ("fov_angle", float),
    "fov-threshold": ("fov_threshold", float),
    "orientations": ("orientation_count", int),
    "area-fraction": ("area_fraction", float),
    "change-limit": ("change_limit", float),
    "max-probes": ("max_probes", int),
    "discard-fraction": ("discard_fraction", float),
    "probe-polarity": ("probe_polarity", str),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_pipeline_flags(p):
    g = p.add_argument_group("pipeline")
    for flag, (name, typ) in PARAM_FLAGS.items():
        kw = {"choices": POLARITIES} if flag == "probe-polarity" else {}
        g.add_argument(f"--{flag}", dest=name, type=typ, default=None,
                       help=f"default {getattr(PipelineParams(), name)}", **kw)
    p.add_argument("--out", default=None, help="output directory (default: current directory)")
    p.add_argument("--save-maps", action="store_true", help="also write vesselness and normalized maps")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lipvessel", description="Vessel segmentation of fundus images with LIP probes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    seg = sub.add_parser("segment", help="segment one image")
    seg.add_argument("image")
    seg.add_argument("--fov", help="FOV mask (thresholded from the image when absent)")
    seg.add_argument("--reference", help="reference segmentation, enables the overlay")
    seg.add_argument("--config", help="key = value file with default flag values")
    _add_pipeline_flags(seg)

    bat = sub.add_parser("batch", help="segment every image of a dataset layout")
    bat.add_argument("config")
    bat.add_argument("--jobs", type=int, default=1, help="worker processes")
    _add_pipeline_flags(bat)

    ev = sub.add_parser("eval", help="score predicted masks against references")
    ev.add_argument("pred_dir")
    ev.add_argument("config")
    ev.add_argument("--out", default=None, help="CSV path (default PRED_DIR/metrics.csv)")
    ev.add_argument("--full-frame-eval", action="store_true", help="count every pixel, not only the FOV")
    ev.add_argument("-v", "--verbose", action="store_true")
    return parser


def params_from(args, config: dict) -> PipelineParams:
    """CLI flags override config-file values, which override the defaults."""
    kw = {}
    for flag, (name, typ) in PARAM_FLAGS.items():
        if flag in config:
            try:
                kw[name] = typ(config[flag])
            except ValueError:
                raise UsageError(f"bad value for {flag}: {config[flag]!r}")
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    try:
        return PipelineParams(**kw)
    except ValueError as exc:
        raise UsageError(str(exc))


def layout_from(config: dict, params: PipelineParams) -> fileio.DatasetLayout:
    if "images" not in config:
        raise UsageError("config needs an 'images' glob")
    return fileio.DatasetLayout(
        image_glob=config["images"],
        fov_glob=config.get("fov"),
        reference_glob=config.get("references"),
        fov_angle=params.fov_angle,
        key_pattern=config.get("key-pattern", fileio.DEFAULT_KEY_PATTERN),
    )


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def run_one(image_path, fov_path, ref_path, params, out_dir, save_maps):
    """Segment one file and write its outputs. Returns (stem, I, seconds)."""
    rgb = fileio.read_color_image(image_path)
    fov = fileio.read_mask(fov_path) if fov_path else None
    ref = fileio.read_mask(ref_path) if ref_path else None
    t0 = time.perf_counter()
    res = segment_vessels(rgb, fov, params)
    elapsed = time.perf_counter() - t0
    overlay = fileio.render_overlay(res.mask, ref, res.fov) if ref is not None else None

    stem = _stem(image_path)
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, stem)
    fileio.write_mask_png(f"{base}_vessels.png", res.mask)
    if save_maps:
        fileio.write_pfm(f"{base}_vesselness.pfm", res.vesselness.data)
        fileio.write_png16(f"{base}_vesselness.png", res.vesselness.data)
        fileio.write_pfm(f"{base}_phi.pfm", res.normalized.data)
        fileio.write_png16(f"{base}_phi.png", res.normalized.data)
    if overlay is not None:
        fileio.save_rgb(f"{base}_overlay.png", overlay)
    return stem, res.n_probes, elapsed


def _load_config(path):
    try:
        return fileio.read_config(path)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}")


def cmd_segment(args) -> int:
    config = _load_config(args.config) if args.config else {}
    params = params_from(args, config)
    for p in (args.image, args.fov, args.reference):
        if p and not os.path.isfile(p):
            print(f"lipvessel: no such file: {p}", file=sys.stderr)
            return EXIT_IO
    stem, n, dt = run_one(args.image, args.fov, args.reference, params,
                          args.out or config.get("out", "."), args.save_maps)
    print(f"{stem}: I={n} probes, {dt:.2f} s")
    return EXIT_OK


def _batch_job(job):
    image, fov, ref, params, out, save_maps = job
    try:
        return run_one(image, fov, ref, params, out, save_maps), None
    except OSError as exc:
        return (_stem(image), None, None), (EXIT_IO, str(exc))
    except Exception as exc:  # one bad image must not stop the batch
        return (_stem(image), None, None), (EXIT_PIPELINE, f"{type(exc).__name__}: {exc}")


def cmd_batch(args) -> int:
    config = _load_config(args.config)
    params = params_from(args, config)
    layout = layout_from(config, params)
    images = layout.images()
    if not images:
        print(f"lipvessel: no image matches {layout.image_glob!r}", file=sys.stderr)
        return EXIT_IO
    fovs, refs = layout.fovs(), layout.references()
    out = args.out or config.get("out", ".")
    jobs = [(images[k], fovs.get(k), refs.get(k), params, out, args.save_maps) for k in sorted(images)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_batch_job, jobs))
    else:
        results = [_batch_job(j) for j in jobs]
    status = EXIT_OK
    for (stem, n, dt), err in results:
        if err:
            log.error("%s failed: %s", stem, err[1])
            print(f"{stem}: FAILED ({err[1]})", file=sys.stderr)
            status = max(status, err[0])
        else:
            print(f"{stem}: I={n} probes, {dt:.2f} s")
    return status


def cmd_eval(args) -> int:
    config = _load_config(args.config)
    layout = layout_from(config, params_from(argparse.Namespace(), config))
    preds = sorted(
        p for p in (os.path.join(args.pred_dir, n) for n in os.listdir(args.pred_dir))
        if p.endswith("_vessels.png")
    )
    if not preds:
        print(f"lipvessel: no *_vessels.png in {args.pred_dir}", file=sys.stderr)
        return EXIT_IO
    refs, fovs = layout.references(), layout.fovs()
    missing = [_stem(p) for p in preds if layout.key(p) not in refs]
    if not args.full_frame_eval:
        missing += [_stem(p) + " (fov)" for p in preds if layout.key(p) not in fovs]
    if missing:
        print("lipvessel: missing reference for: " + ", ".join(missing), file=sys.stderr)
        return EXIT_IO
    records = []
    for p in preds:
        k = layout.key(p)
        pred, ref = fileio.read_mask(p), fileio.read_mask(refs[k])
        fov = None if args.full_frame_eval else fileio.read_mask(fovs[k])
        records.append(evaluation.metrics(evaluation.confusion(pred, ref, fov), k))
    out = args.out or os.path.join(args.pred_dir, "metrics.csv")
    summary = evaluation.write_csv(out, records)
    print(summary.line())
    return EXIT_OK


COMMANDS = {"segment": cmd_segment, "batch": cmd_batch, "eval": cmd_eval}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"lipvessel: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lipvessel: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"lipvessel: pipeline failure: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
