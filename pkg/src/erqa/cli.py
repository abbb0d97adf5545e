"""Command-line interface.

Subcommands::

    erqa score MANIFEST        batch-score frame directories
    erqa visualize GT DIST OUT render the TP/FP/FN map of one frame pair
    erqa correlate ...         PLCC/SRCC of metric scores vs subjective scores
    erqa panel GT DIST         raw vs shift-compensated PSNR/SSIM/ERQA
    erqa edges FRAME OUT       export the Canny edge map as PNG
    erqa shift-grid GT DIST    dump the PSNR table of the shift search as CSV

Exit codes: 0 success, 2 manifest or frame-set errors, 3 I/O or decode
errors, 4 alignment errors.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from .baselines import metric_panel, ssim
from .edges import CannyParams, detect_edges
from .exceptions import (AlignmentError, ConfigError, CorrelationError, DecodeError, FittingError,
                         GeometryError, ManifestError)
from .image import Region, crop, load_frame, overlap_pair, save_frame, to_luma
from .matching import ABLATION_STAGES, ErqaConfig, erqa, match_edges, render_classification
from .reporting import dumps_csv, dumps_json, format_float, write_text
from .shift import find_global_shift, psnr, score_with_compensation
from .stats import (BradleyTerry, build_correlation_report, read_metric_scores,
                    read_subjective, read_votes)

log = logging.getLogger("erqa")

EXIT_OK, EXIT_MANIFEST, EXIT_IO, EXIT_ALIGN = 0, 2, 3, 4

POOLS = {"mean": np.mean, "median": np.median, "min": np.min}
BASELINES = ("psnr", "ssim", "psnr*", "ssim*")
FULL_FRAME = "full"


# ---------------------------------------------------------------- manifest


def load_manifest(path, overrides=None):
    """Parse a YAML (or JSON) run manifest into a plain dict.

    Relative paths are resolved against the manifest's directory; entries in
    `overrides` (from command-line flags) win over the file.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
    except yaml.YAMLError as exc:
        raise ManifestError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ManifestError(f"{path}: manifest must be a mapping")
    base = path.parent
    overrides = overrides or {}

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    try:
        gt_dir = resolve(raw["gt_dir"])
        dist_dirs = {str(k): resolve(v) for k, v in raw["dist_dirs"].items()}
    except (KeyError, AttributeError, TypeError) as exc:
        raise ManifestError(f"{path}: manifest needs gt_dir and a dist_dirs mapping") from exc
    if not dist_dirs:
        raise ManifestError(f"{path}: dist_dirs is empty")

    regions = {}
    for name, rect in (raw.get("regions") or {}).items():
        if isinstance(rect, dict):
            rect = [rect.get(k) for k in ("x", "y", "w", "h")]
        try:
            regions[str(name)] = Region(*(int(v) for v in rect))
        except (TypeError, ValueError) as exc:
            raise ManifestError(f"{path}: region {name!r} must be [x, y, w, h]") from exc

    cfg = dict(raw.get("config") or {})
    cfg.update({k: v for k, v in overrides.items() if v is not None and k in _CONFIG_KEYS})
    config = _build_config(cfg)

    output = dict(raw.get("output") or {})
    out_path = overrides.get("output") or output.get("path")
    fmt = overrides.get("format") or output.get("format") or "json"
    if fmt not in ("json", "csv"):
        raise ManifestError(f"{path}: output format must be json or csv, not {fmt!r}")
    if out_path is None:
        out_path = base / f"erqa_report.{fmt}"
    elif not overrides.get("output"):
        out_path = resolve(out_path)

    metrics = [str(m).lower() for m in raw.get("metrics") or []]
    metrics = [m for m in metrics if m != "erqa"]
    unknown = [m for m in metrics if m not in BASELINES]
    if unknown:
        raise ManifestError(f"{path}: unknown metrics {unknown}; choose from {BASELINES}")

    pool = overrides.get("pool") or raw.get("pool") or "mean"
    if pool not in POOLS:
        raise ManifestError(f"{path}: pool must be one of {sorted(POOLS)}")
    return {
        "gt_dir": gt_dir,
        "dist_dirs": dist_dirs,
        "regions": regions,
        "config": config,
        "metrics": metrics,
        "pool": pool,
        "ablation": bool(overrides.get("ablation") or raw.get("ablation", False)),
        "output": Path(out_path),
        "format": fmt,
    }


_CONFIG_KEYS = ("version", "global_shift", "local_tolerance", "shift_radius",
                "canny_low", "canny_high", "magnitude_norm")


def _build_config(cfg):
    unknown = set(cfg) - set(_CONFIG_KEYS)
    if unknown:
        raise ManifestError(f"unknown config keys {sorted(unknown)}")
    try:
        return ErqaConfig(
            version=str(cfg.get("version", "1.1")),
            enable_global_shift=bool(cfg.get("global_shift", True)),
            enable_local_tolerance=bool(cfg.get("local_tolerance", True)),
            shift_radius=int(cfg.get("shift_radius", 3)),
            canny=CannyParams(float(cfg.get("canny_low", 100)), float(cfg.get("canny_high", 200)),
                              cfg.get("magnitude_norm", "L1")),
        )
    except ConfigError as exc:
        raise ManifestError(str(exc)) from exc


def _config_dict(config):
    return {
        "version": config.version,
        "global_shift": config.enable_global_shift,
        "local_tolerance": config.enable_local_tolerance,
        "shift_radius": config.shift_radius,
        "canny_low": config.canny.low_threshold,
        "canny_high": config.canny.high_threshold,
        "magnitude_norm": config.canny.magnitude_norm,
    }


def list_frames(directory):
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory}: no such directory")
    return sorted(p.name for p in directory.iterdir() if p.suffix.lower() == ".png")


def check_frame_sets(gt_dir, dist_dirs):
    frames = list_frames(gt_dir)
    if not frames:
        raise ManifestError(f"{gt_dir}: no PNG frames")
    expected = set(frames)
    for name, d in dist_dirs.items():
        got = set(list_frames(d))
        diff = sorted(expected ^ got)
        if diff:
            side = "missing from" if diff[0] in expected else "unexpected in"
            raise ManifestError(f"frame {diff[0]} {side} {name} ({d})")
    return frames


# ---------------------------------------------------------------- scoring


def score_columns(config, metrics, ablation):
    if ablation:
        cols = list(ABLATION_STAGES)
    else:
        cols = [f"ERQAv{config.version}"]
    return cols + [m.upper() for m in metrics]


def _score_pair(gt, dist, config, metrics, ablation):
    out = {}
    if ablation:
        for name, stage in ABLATION_STAGES.items():
            stage = ErqaConfig(stage.version, stage.enable_global_shift,
                               stage.enable_local_tolerance, config.shift_radius, config.canny)
            out[name] = erqa(gt, dist, stage).f1
    else:
        out[f"ERQAv{config.version}"] = erqa(gt, dist, config).f1
    if metrics:
        gy, dy = to_luma(gt), to_luma(dist)
        for m in metrics:
            fn = psnr if m.startswith("psnr") else ssim
            if m.endswith("*"):
                out[m.upper()] = score_with_compensation(fn, gy, dy, config.shift_radius)
            else:
                out[m.upper()] = fn(gy, dy)
    return out


def _score_task(task):
    gt_path, dist_path, regions, config, metrics, ablation = task
    gt = load_frame(gt_path)
    dist = load_frame(dist_path)
    if not regions:
        return {FULL_FRAME: _score_pair(gt, dist, config, metrics, ablation)}
    return {name: _score_pair(crop(gt, r), crop(dist, r), config, metrics, ablation)
            for name, r in regions.items()}


def run_score(manifest, workers=None):
    """Score every frame of every model; returns the report dict."""
    frames = check_frame_sets(manifest["gt_dir"], manifest["dist_dirs"])
    regions = manifest["regions"]
    config = manifest["config"]
    tasks = [(manifest["gt_dir"] / f, d / f, regions, config,
              manifest["metrics"], manifest["ablation"])
             for d in manifest["dist_dirs"].values() for f in frames]

    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(tasks) == 1:
        results = [_score_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_score_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))

    columns = score_columns(config, manifest["metrics"], manifest["ablation"])
    pool_fn = POOLS[manifest["pool"]]
    region_names = list(regions) or [FULL_FRAME]
    models = {}
    it = iter(results)
    for model in manifest["dist_dirs"]:
        per_frame = {f: next(it) for f in frames}
        models[model] = {}
        for region in region_names:
            rows = {f: per_frame[f][region] for f in frames}
            pooled = {c: float(pool_fn([rows[f][c] for f in frames])) for c in columns}
            models[model][region] = {"frames": rows, "pooled": pooled}
    return {
        "config": _config_dict(config),
        "pool": manifest["pool"],
        "columns": columns,
        "regions": {name: list(r) for name, r in regions.items()} or {FULL_FRAME: None},
        "models": models,
    }


def report_to_csv(report):
    columns = report["columns"]
    rows = []
    for model, by_region in report["models"].items():
        for region, block in by_region.items():
            for frame, vals in block["frames"].items():
                rows.append([model, region, frame, *(vals[c] for c in columns)])
            rows.append([model, region, report["pool"], *(block["pooled"][c] for c in columns)])
    return dumps_csv(["model", "region", "frame", *columns], rows)


def report_to_scores(report, column=None):
    """Pooled per-model values as ``{region: {metric: {model: value}}}``."""
    columns = [column] if column else report["columns"]
    out = {}
    for model, by_region in report["models"].items():
        for region, block in by_region.items():
            for c in columns:
                out.setdefault(region, {}).setdefault(c, {})[model] = block["pooled"][c]
    return out


# ---------------------------------------------------------------- commands


def _config_from_args(args):
    cfg = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    return _build_config({k: v for k, v in cfg.items() if v is not None})


def cmd_score(args):
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    overrides.update(output=args.output, format=args.format, pool=args.pool,
                     ablation=args.ablation)
    manifest = load_manifest(args.manifest, overrides)
    report = run_score(manifest, workers=args.workers)
    text = dumps_json(report) if manifest["format"] == "json" else report_to_csv(report)
    write_text(manifest["output"], text)
    log.info("wrote %s", manifest["output"])
    return EXIT_OK


def cmd_visualize(args):
    config = _config_from_args(args)
    gt = load_frame(args.gt)
    dist = load_frame(args.dist)
    if args.edge_maps:
        # inputs are 0/255 masks, e.g. from 'erqa edges'; no detection, no global shift
        gt, dist = to_luma(gt), to_luma(dist)
        result = match_edges(gt > 127, dist > 127, config)
    else:
        result = erqa(gt, dist, config)
    background = gt if args.background == "gt" else dist
    if result.shift is not None:
        a, b = overlap_pair(gt, dist, result.shift)
        background = a if args.background == "gt" else b
    save_frame(render_classification(result, background), args.out)
    shift = result.shift or (0, 0)
    print(f"tp={result.tp} fp={result.fp} fn={result.fn} "
          f"precision={format_float(result.precision)} recall={format_float(result.recall)} "
          f"f1={format_float(result.f1)} shift=({shift[0]},{shift[1]})")
    return EXIT_OK


def cmd_panel(args):
    config = _config_from_args(args)
    panel = metric_panel(load_frame(args.gt), load_frame(args.dist), config)
    if args.format == "json":
        text = dumps_json(panel)
    else:
        text = dumps_csv(["metric", "raw", "compensated"],
                         [[m, v["raw"], v["compensated"]] for m, v in panel.items()])
    _emit(text, args.output)
    return EXIT_OK


def cmd_edges(args):
    params = CannyParams(args.canny_low or 100.0, args.canny_high or 200.0,
                         args.magnitude_norm or "L1")
    save_frame(detect_edges(to_luma(load_frame(args.frame)), params), args.out)
    return EXIT_OK


def cmd_shift_grid(args):
    res = find_global_shift(load_frame(args.gt), load_frame(args.dist), args.shift_radius or 3)
    r = res.radius
    rows = [[dy, *res.psnr_grid[dy + r]] for dy in range(-r, r + 1)]
    text = dumps_csv(["dy\\dx", *range(-r, r + 1)], rows)
    _emit(text, args.output)
    print(f"best shift dx={res.shift.dx} dy={res.shift.dy} psnr={format_float(res.psnr)}",
          file=sys.stderr)
    return EXIT_OK


def cmd_correlate(args):
    scores = {}
    for path in args.scores or []:
        read_metric_scores(path, into=scores)
    for path in args.report or []:
        with open(path, encoding="utf-8") as fh:
            for region, by_metric in report_to_scores(json.load(fh)).items():
                for metric, vals in by_metric.items():
                    scores.setdefault(region, {}).setdefault(metric, {}).update(vals)
    if not scores:
        raise AlignmentError("no metric scores given (use --scores or --report)")
    if args.regions:
        wanted = [r.strip() for r in args.regions.split(",") if r.strip()]
        missing = [r for r in wanted if r not in scores]
        if missing:
            raise AlignmentError(f"regions {missing} have no metric scores")
        scores = {r: scores[r] for r in wanted}

    if args.subjective:
        subjective = read_subjective(args.subjective)
    else:
        subjective = {}
        fitted_rows = []
        tallies = read_votes(args.votes)
        for region in scores:
            if region in tallies:
                items, wins = tallies[region]
            elif None in tallies:
                items, wins = tallies[None]
            else:
                raise AlignmentError(f"no votes for region {region!r}")
            model = BradleyTerry(tol=args.tol).fit(wins, items=items)
            subjective[region] = dict(zip(items, model.scores_.tolist()))
            fitted_rows += [[region, item, s] for item, s in subjective[region].items()]
        bt_text = dumps_csv(["region", "item", "score"], fitted_rows)
        if args.save_subjective:
            write_text(args.save_subjective, bt_text)
        print("Bradley-Terry subjective scores:")
        print(bt_text, end="")

    report = build_correlation_report(scores, subjective)
    text = report.to_json() if args.format == "json" else report.to_csv()
    _emit(text, args.output)
    return EXIT_OK


def _emit(text, path):
    if path:
        write_text(path, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- parser


def _add_erqa_flags(p):
    p.add_argument("--version", dest="version", choices=("1.0", "1.1"))
    p.add_argument("--no-global-shift", dest="global_shift", action="store_const", const=False)
    p.add_argument("--no-local-tolerance", dest="local_tolerance", action="store_const",
                   const=False)
    p.add_argument("--shift-radius", dest="shift_radius", type=int, metavar="N")
    _add_canny_flags(p)


def _add_canny_flags(p):
    p.add_argument("--canny-low", dest="canny_low", type=float, metavar="N")
    p.add_argument("--canny-high", dest="canny_high", type=float, metavar="N")
    p.add_argument("--magnitude-norm", dest="magnitude_norm", choices=("L1", "L2"))


def build_parser():
    parser = argparse.ArgumentParser(prog="erqa", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="batch-score frame directories from a manifest")
    p.add_argument("manifest")
    _add_erqa_flags(p)
    p.add_argument("--ablation", action="store_true",
                   help="report the four ablation stages instead of one ERQA column")
    p.add_argument("--pool", choices=sorted(POOLS))
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("visualize", help="render TP/FP/FN classification of a frame pair")
    p.add_argument("gt")
    p.add_argument("dist")
    p.add_argument("out")
    p.add_argument("--background", choices=("gt", "dist"), default="gt")
    p.add_argument("--edge-maps", action="store_true",
                   help="inputs are binary edge masks rather than frames")
    _add_erqa_flags(p)
    p.set_defaults(func=cmd_visualize)

    p = sub.add_parser("correlate", help="PLCC/SRCC of metric scores against subjective scores")
    p.add_argument("--scores", action="append", help="CSV region,item,metric,value")
    p.add_argument("--report", action="append", help="JSON report written by 'erqa score'")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--votes", help="CSV item_a,item_b,winner[,region]")
    src.add_argument("--subjective", help="CSV region,item,score")
    p.add_argument("--regions", help="comma-separated regions to include, in order")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--save-subjective", help="write fitted Bradley-Terry scores here")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("panel", help="raw vs shift-compensated PSNR, SSIM and ERQA")
    p.add_argument("gt")
    p.add_argument("dist")
    _add_erqa_flags(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_panel)

    p = sub.add_parser("edges", help="export the Canny edge map of a frame as PNG")
    p.add_argument("frame")
    p.add_argument("out")
    _add_canny_flags(p)
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("shift-grid", help="dump the shift-search PSNR table as CSV")
    p.add_argument("gt")
    p.add_argument("dist")
    p.add_argument("--shift-radius", dest="shift_radius", type=int, metavar="N")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_shift_grid)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ManifestError, ConfigError, GeometryError) as exc:
        print(f"erqa: {exc}", file=sys.stderr)
        return EXIT_MANIFEST
    except (AlignmentError, CorrelationError, FittingError) as exc:
        print(f"erqa: {exc}", file=sys.stderr)
        return EXIT_ALIGN
    except (DecodeError, OSError) as exc:
        print(f"erqa: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
