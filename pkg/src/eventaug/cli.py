"""Command-line entry points: augment, perturb, sweep, synth, repr.

Each subcommand is a thin wrapper over a ``cmd_*`` function that can also be
called directly and returns the JSON-serializable report.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .augment import STRATEGIES, AugmentConfig, apply_params, item_seed, params_record, sample_params
from .core import EventError, EventStream, SensorGeometry
from .fileio import FORMAT_VERSIONS, FormatTag, encode, read_events, write_events
from .representations import KINDS, raster_distance, rasterize
from .synth import generate, parse_scene_config
from .transforms import (
    TransformStats,
    VptParams,
    check_theta,
    as_plane,
    apply_spatial_rotation,
    apply_sts,
    apply_vpt,
    default_tau,
    spatial_midpoint,
    temporal_midpoint,
)

SCHEMA = 1
EXIT_OK, EXIT_FILE_FAILED, EXIT_BAD_CONFIG = 0, 1, 2


class ConfigError(EventError):
    pass


def worker_count(requested: int | None = None) -> int:
    n = requested if requested else (os.cpu_count() or 1)
    cap = os.environ.get("EVT_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"EVT_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


def _geometry(width, height) -> SensorGeometry | None:
    if width is None and height is None:
        return None
    if width is None or height is None:
        raise ConfigError("give both --width and --height, or neither")
    return SensorGeometry(width, height)


def _output_names(inputs) -> list[str]:
    seen: set[str] = set()
    names = []
    for i, p in enumerate(inputs):
        name = Path(p).name
        if name in seen:
            stem, suffix = os.path.splitext(name)
            name = f"{stem}.{i}{suffix}"
        seen.add(name)
        names.append(name)
    return names


# --- augment --------------------------------------------------------------------

def _augment_one(index, path, out_path, config, fmt, geometry):
    entry = {"index": index, "input": str(path), "output": str(out_path), "seed": item_seed(config.seed, index)}
    start = time.perf_counter()
    try:
        f = FormatTag.from_path(path) if fmt is None else FormatTag.parse(fmt)
        stream = read_events(path, f, geometry)
        params = sample_params(entry["seed"], config, stream)
        out, stats = apply_params(stream, params)
        data = encode(out, f)
        with open(out_path, "wb") as fh:
            fh.write(data)
        entry.update(status="ok", format=f.value, params=params_record(params), stats=stats.to_dict())
    except (EventError, OSError) as e:
        entry.update(status="error", error=f"{type(e).__name__}: {e}")
    entry["wall_time_s"] = time.perf_counter() - start
    return entry


def cmd_augment(inputs, out_dir, config: AugmentConfig, fmt=None, geometry=None, workers: int = 1) -> dict:
    """Augment every input file into ``out_dir``; one report entry per file, in input order."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = _output_names(inputs)
    start = time.perf_counter()
    jobs = [(i, p, out_dir / names[i], config, fmt, geometry) for i, p in enumerate(inputs)]
    n = worker_count(workers)
    if n == 1:
        files = [_augment_one(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            files = list(pool.map(lambda j: _augment_one(*j), jobs))
    failed = sum(f["status"] != "ok" for f in files)
    return {
        "schema": SCHEMA,
        "command": "augment",
        "version": __version__,
        "format_versions": FORMAT_VERSIONS,
        "config": config.to_dict(),
        "files": files,
        "failed": failed,
        "wall_time_s": time.perf_counter() - start,
    }


# --- perturb / sweep ------------------------------------------------------------

def _perturbed(stream: EventStream, strategy: str, plane, theta: float, tau) -> tuple[EventStream, TransformStats]:
    n = len(stream)
    if strategy == "none" or theta == 0:
        return stream, TransformStats(n, n)
    if strategy == "rotation":
        g = stream.geometry
        return apply_spatial_rotation(stream, theta, ((g.height - 1) / 2, (g.width - 1) / 2))
    tau = default_tau(stream) if tau == "auto" else float(tau)
    center = spatial_midpoint(stream, plane)
    if strategy == "vpt":
        return apply_vpt(stream, VptParams(plane, theta, tau, center, temporal_midpoint(stream)))
    if strategy == "sts":
        out = apply_sts(stream, plane, theta, tau, center)
        return out, TransformStats(n, len(out))
    raise ConfigError(f"strategy {strategy!r} cannot be used for perturbation")


def cmd_perturb(stream: EventStream, planes, thetas, repr_kind: str = "count", strategy: str = "vpt",
                tau="auto", bins: int = 5) -> dict:
    """Distance from the unperturbed raster for every (plane, theta) cell."""
    planes = [as_plane(p) for p in planes]
    thetas = [check_theta(t) for t in thetas]
    if not planes or not thetas:
        raise ConfigError("perturbation grid needs at least one plane and one angle")
    base = rasterize(stream, repr_kind, bins)
    dist = np.zeros((len(planes), len(thetas)))
    kept = np.ones_like(dist)
    for i, plane in enumerate(planes):
        for j, theta in enumerate(thetas):
            out, stats = _perturbed(stream, strategy, plane, theta, tau)
            dist[i, j] = raster_distance(base, rasterize(out, repr_kind, bins))
            kept[i, j] = stats.retained_count / stats.input_count if stats.input_count else 1.0
    return {
        "schema": SCHEMA,
        "command": "perturb",
        "strategy": strategy,
        "repr": repr_kind,
        "bins": bins,
        "tau": tau,
        "planes": [p.value for p in planes],
        "thetas": thetas,
        "distance": dist.tolist(),
        "retained_fraction": kept.tolist(),
    }


def perturb_text_grid(report: dict) -> str:
    head = "plane  " + " ".join(f"{t:>9.4f}" for t in report["thetas"])
    rows = [f"{p:<6} " + " ".join(f"{d:>9.6f}" for d in row) for p, row in zip(report["planes"], report["distance"])]
    return "\n".join([head, *rows]) + "\n"


def cmd_sweep(streams, thetas, strategy: str = "vpt", repr_kind: str = "count", plane="yt",
              tau="auto", bins: int = 5) -> dict:
    """Mean raster distance and mean spatial-discard fraction per angle, over ``streams``."""
    thetas = [check_theta(t) for t in thetas]
    if not thetas:
        raise ConfigError("sweep needs at least one angle")
    if not streams:
        raise ConfigError("sweep needs at least one input")
    plane = as_plane(plane)
    bases = [rasterize(s, repr_kind, bins) for s in streams]
    rows = []
    for theta in thetas:
        d, f = [], []
        for s, base in zip(streams, bases):
            out, stats = _perturbed(s, strategy, plane, theta, tau)
            d.append(raster_distance(base, rasterize(out, repr_kind, bins)))
            f.append(stats.spatial_discard_fraction)
        rows.append({"theta": theta, "mean_distance": float(np.mean(d)), "mean_spatial_discard": float(np.mean(f))})
    return {"schema": SCHEMA, "command": "sweep", "strategy": strategy, "repr": repr_kind,
            "plane": plane.value, "tau": tau, "bins": bins, "angles": rows}


# --- synth / repr ---------------------------------------------------------------

def cmd_synth(config_path, output_path, fmt=None) -> dict:
    scene, cfg = parse_scene_config(Path(config_path).read_text())
    stream = generate(scene, cfg)
    write_events(output_path, stream, fmt)
    return {"schema": SCHEMA, "command": "synth", "output": str(output_path), "events": len(stream),
            "width": stream.geometry.width, "height": stream.geometry.height}


def cmd_repr(stream: EventStream, kind: str, output_path, bins: int = 5) -> dict:
    """Rasterize and write ``.txt`` as a text grid, anything else as ``RAS1`` binary."""
    r = rasterize(stream, kind, bins)
    out = Path(output_path)
    if out.suffix.lower() == ".txt":
        out.write_text(r.to_text())
    else:
        out.write_bytes(r.to_bytes())
    return {"schema": SCHEMA, "command": "repr", "kind": kind, "dims": list(r.dims), "output": str(out)}


# --- argument parsing -----------------------------------------------------------

def _tau_arg(s: str):
    if s == "auto":
        return s
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tau must be 'auto' or a positive number, got {s!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"tau must be positive, got {s!r}")
    return v


def _float_list(s: str) -> list[float]:
    try:
        return [float(v) for v in s.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {s!r}") from None


def _add_io_args(p):
    p.add_argument("--format", choices=["bin", "csv", "evt"], help="override format inferred from extension")
    p.add_argument("--width", type=int, help="sensor width for .bin/.csv input (default: inferred)")
    p.add_argument("--height", type=int, help="sensor height for .bin/.csv input (default: inferred)")
    p.add_argument("--report", help="write the JSON report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eventaug", description="Spatiotemporal augmentation of event streams.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="augment a batch of event files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--strategy", choices=STRATEGIES, default="vpt-sts")
    p.add_argument("--theta-max", type=float, default=AugmentConfig.theta_max)
    p.add_argument("--tau", type=_tau_arg, default="auto")
    p.add_argument("--plane", choices=["yt", "xt", "random"], default="random")
    p.add_argument("--center", choices=["midpoint", "random"], default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prob", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=0, help="worker threads (default: CPU count, capped by EVT_THREADS)")
    _add_io_args(p)

    p = sub.add_parser("perturb", help="raster distance over a (plane, angle) grid")
    p.add_argument("input")
    p.add_argument("--grid", required=True, help='JSON file: {"planes": ["yt", "xt"], "thetas": [...]}')
    p.add_argument("--repr", choices=KINDS, default="count")
    p.add_argument("--strategy", choices=["vpt", "sts", "rotation"], default="vpt")
    p.add_argument("--tau", type=_tau_arg, default="auto")
    p.add_argument("--bins", type=int, default=5)
    p.add_argument("--text", help="also write the distance matrix as a text grid")
    _add_io_args(p)

    p = sub.add_parser("sweep", help="per-angle summary over several inputs")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--thetas", type=_float_list, required=True, help="comma-separated angles in radians")
    p.add_argument("--strategy", choices=["vpt", "sts", "rotation"], default="vpt")
    p.add_argument("--repr", choices=KINDS, default="count")
    p.add_argument("--plane", choices=["yt", "xt"], default="yt")
    p.add_argument("--tau", type=_tau_arg, default="auto")
    p.add_argument("--bins", type=int, default=5)
    _add_io_args(p)

    p = sub.add_parser("synth", help="generate events from a scene config")
    p.add_argument("config")
    p.add_argument("output")
    p.add_argument("--format", choices=["bin", "csv", "evt"])
    p.add_argument("--report")

    p = sub.add_parser("repr", help="rasterize an event file")
    p.add_argument("input")
    p.add_argument("--kind", choices=KINDS, default="count")
    p.add_argument("--bins", type=int, default=5)
    p.add_argument("--out", required=True, help=".txt for a text grid, otherwise RAS1 binary")
    _add_io_args(p)
    return ap


def dump_report(report: dict, path=None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _fail(msg):
    raise ConfigError(msg)


def _config_check(fn):
    try:
        return fn()
    except EventError as e:
        raise ConfigError(str(e)) from None


def _load_grid(path):
    try:
        grid = json.loads(Path(path).read_text())
        planes, thetas = list(grid["planes"]), [float(t) for t in grid["thetas"]]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"cannot read grid file {path}: {e}") from None
    if not planes or not thetas:
        raise ConfigError("perturbation grid needs at least one plane and one angle")
    _config_check(lambda: ([as_plane(p) for p in planes], [check_theta(t) for t in thetas]))
    return planes, thetas


def _read(path, args) -> EventStream:
    return read_events(path, args.format, _geometry(args.width, args.height))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "augment":
            config = AugmentConfig(strategy=args.strategy, theta_max=args.theta_max, tau=args.tau,
                                   center=args.center, plane=args.plane, seed=args.seed, prob=args.prob)
            report = cmd_augment(args.inputs, args.out, config, args.format,
                                 _geometry(args.width, args.height), worker_count(args.workers))
            dump_report(report, args.report)
            return EXIT_FILE_FAILED if report["failed"] else EXIT_OK
        if args.command == "perturb":
            planes, thetas = _load_grid(args.grid)
            report = cmd_perturb(_read(args.input, args), planes, thetas, args.repr,
                                 args.strategy, args.tau, args.bins)
            report["input"] = args.input
            if args.text:
                Path(args.text).write_text(perturb_text_grid(report))
        elif args.command == "sweep":
            _config_check(lambda: [check_theta(t) for t in args.thetas] or _fail("no angles given"))
            streams = [_read(p, args) for p in args.inputs]
            report = cmd_sweep(streams, args.thetas, args.strategy, args.repr, args.plane, args.tau, args.bins)
            report["inputs"] = args.inputs
        elif args.command == "synth":
            report = cmd_synth(args.config, args.output, args.format)
        else:
            report = cmd_repr(_read(args.input, args), args.kind, args.out, args.bins)
            report["input"] = args.input
    except ConfigError as e:
        print(f"eventaug: invalid configuration: {e}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except EventError as e:
        print(f"eventaug: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FILE_FAILED if args.command in ("perturb", "sweep", "repr") else EXIT_BAD_CONFIG
    except OSError as e:
        print(f"eventaug: {e}", file=sys.stderr)
        return EXIT_FILE_FAILED
    dump_report(report, getattr(args, "report", None))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
