"""Command-line entry point.

    rsloc sweep --config pilot_vlp16 --out out/pilot
    rsloc trajectory --config trajectory_vlp32c --out out/traj [--baseline ndt.csv]
    rsloc render --grid out/pilot/grid.csv --metric center_error --out center.ppm

Exit status: 0 success, 1 invalid configuration or arguments, 2 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import io as rio
from .config import DEFAULT_SCALES, METRICS, ConfigError, bundled_config, parse_config
from .experiments import OK, compare_with_baseline, effective_range, run_sweep, run_trajectory, summarize

log = logging.getLogger("rsloc")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
SUMMARY_RANGES = ((-36.0, 36.0), (-50.0, 50.0))
BAND = (6.0, 36.0)


def _load(arg: str):
    p = Path(arg)
    if not p.exists():
        try:
            p = bundled_config(arg)
        except FileNotFoundError:
            raise FileNotFoundError(f"config not found: {arg}") from None
    return parse_config(p)


def _outdir(arg, cfg) -> Path:
    out = Path(arg) if arg else cfg.output
    if out is None:
        raise ConfigError("no output directory: pass --out or set run.output")
    out.mkdir(parents=True, exist_ok=True)
    return out


def band_stats(grid, band=BAND, threshold=0.1) -> dict:
    ce = grid.metric("center_error")
    ok = grid.status() == OK
    rows = (grid.distances >= band[0]) & (grid.distances <= band[1])
    sel = ce[rows][ok[rows]]
    return {
        "band_m": list(band),
        "cells_ok": int(sel.size),
        "mean_center_error_m": float(sel.mean()) if sel.size else None,
        "fraction_below_0.1m": float(np.mean(sel < threshold)) if sel.size else None,
    }


def cmd_sweep(args) -> int:
    cfg = _load(args.config)
    if cfg.mode != "sweep":
        raise ConfigError(f"config mode is {cfg.mode!r}, expected 'sweep'")
    out = _outdir(args.out, cfg)
    t0 = time.perf_counter()
    grid = run_sweep(cfg.sweep)
    log.info("sweep of %d x %d cells in %.1f s", *grid.shape, time.perf_counter() - t0)
    rio.write_grid_csv(grid, out / "grid.csv")
    for m in METRICS:
        rio.render_heatmap(grid, m, out / f"{m}.ppm", cfg.scales[m])
    stats = band_stats(grid)
    stats["status_counts"] = {s: int(n) for s, n in zip(*np.unique(grid.status(), return_counts=True))}
    stats["correction_enabled"] = cfg.sweep.correction_enabled
    (out / "summary.json").write_text(json.dumps(stats, indent=2) + "\n")
    print(json.dumps(stats))
    return EXIT_OK


def cmd_trajectory(args) -> int:
    cfg = _load(args.config)
    if cfg.mode != "trajectory":
        raise ConfigError(f"config mode is {cfg.mode!r}, expected 'trajectory'")
    out = _outdir(args.out, cfg)
    trace = run_trajectory(cfg.trajectory)
    rio.write_trace_csv(trace, out / "trace.csv")
    rows = summarize(trace, SUMMARY_RANGES)
    rio.write_summary_csv(rows, out / "summary.csv")
    baseline_path = Path(args.baseline) if args.baseline else cfg.baseline
    if baseline_path is not None:
        baseline = rio.read_baseline_csv(baseline_path)
        joined = compare_with_baseline(trace, baseline, cfg.trajectory.sample_step)
        rio.write_comparison_csv(joined, out / "comparison.csv")
    info = {
        "effective_range_m": effective_range(trace),
        "off_by_90_positions_m": [t.position for t in trace if t.off_by_90],
        "failed": sum(t.status != OK for t in trace),
    }
    print(json.dumps(info))
    return EXIT_OK


def cmd_render(args) -> int:
    grid = rio.read_grid_csv(args.grid)
    lo, hi = DEFAULT_SCALES.get(args.metric, (0.0, 1.0))
    scale = (args.min if args.min is not None else lo, args.max if args.max is not None else hi)
    rio.render_heatmap(grid, args.metric, args.out, scale)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rsloc", description="Roadside LiDAR localisation experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="distance x yaw heat-map sweep")
    s.add_argument("--config", required=True, help="config file or bundled config name")
    s.add_argument("--out", help="output directory")
    s.set_defaults(func=cmd_sweep)

    t = sub.add_parser("trajectory", help="straight-road trajectory evaluation")
    t.add_argument("--config", required=True)
    t.add_argument("--out")
    t.add_argument("--baseline", help="position_m,error_m CSV to join against")
    t.set_defaults(func=cmd_trajectory)

    r = sub.add_parser("render", help="render a grid CSV as a PPM heat map")
    r.add_argument("--grid", required=True)
    r.add_argument("--metric", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--min", type=float)
    r.add_argument("--max", type=float)
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except OSError as e:
        print(f"rsloc: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"rsloc: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
