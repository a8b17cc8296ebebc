"""CSV tables, baseline ingestion and plain-text PPM heat maps."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .config import METRICS
from .experiments import OK, STATUSES, BaselineSample, CellMetrics, ErrorGrid, TrajectorySample

GRID_HEADER = ["distance_m", "yaw_deg", "center_error_m", "bbox_area_error_m2", "yaw_error_deg",
               "off_by_90", "point_count", "status"]
TRACE_HEADER = ["position_m", "error_m", "status", "off_by_90", "yaw_error_deg", "point_count"]
BASELINE_HEADER = ["position_m", "error_m"]

# linear ramp endpoints and the colour reserved for cells without a value
RAMP_LOW = (255, 255, 204)
RAMP_HIGH = (177, 0, 38)
SENTINEL = (128, 128, 128)


class CsvFormatError(ValueError):
    pass


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _float(s: str) -> float:
    return math.nan if s == "" else float(s)


def _bool(s: str) -> bool | None:
    if s == "":
        return None
    if s not in ("true", "false"):
        raise ValueError(f"bad boolean {s!r}")
    return s == "true"


def write_grid_csv(grid: ErrorGrid, path) -> None:
    """One row per cell, distance-major then yaw ascending."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GRID_HEADER)
        for i in np.argsort(grid.distances, kind="stable"):
            row = grid.cells[i]
            for j in np.argsort(grid.yaws, kind="stable"):
                c = row[j]
                ok = c.status == OK
                w.writerow([
                    _fmt(float(c.distance)), _fmt(float(c.yaw)),
                    _fmt(c.center_error if ok else None), _fmt(c.bbox_area_error if ok else None),
                    _fmt(c.yaw_error if ok else None), _fmt(c.off_by_90 if ok else None),
                    c.point_count, c.status,
                ])


def read_grid_csv(path) -> ErrorGrid:
    path = Path(path)
    cells: dict[tuple[float, float], CellMetrics] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != GRID_HEADER:
            raise CsvFormatError(f"{path}: expected header {','.join(GRID_HEADER)}")
        for lineno, row in enumerate(r, start=2):
            try:
                d, y, ce, ae, ye, off, n, st = row
                if st not in STATUSES:
                    raise ValueError(f"unknown status {st!r}")
                cell = CellMetrics(float(d), float(y), _float(ce), _float(ae), _float(ye), _bool(off), int(n), st)
            except ValueError as e:
                raise CsvFormatError(f"{path}:{lineno}: {e}") from e
            cells[(cell.distance, cell.yaw)] = cell
    distances = np.array(sorted({k[0] for k in cells}))
    yaws = np.array(sorted({k[1] for k in cells}))
    try:
        grid = [[cells[(float(d), float(y))] for y in yaws] for d in distances]
    except KeyError as e:
        raise CsvFormatError(f"{path}: incomplete grid, missing cell {e}") from e
    return ErrorGrid(distances, yaws, grid)


def _ramp(t: float) -> tuple[int, int, int]:
    return tuple(int(round(lo + t * (hi - lo))) for lo, hi in zip(RAMP_LOW, RAMP_HIGH))


def heatmap_pixels(grid: ErrorGrid, metric: str, scale: tuple[float, float]) -> list[list[tuple[int, int, int]]]:
    """Rows are distances (nearest first), columns yaws; one pixel per cell."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {', '.join(METRICS)}")
    lo, hi = float(scale[0]), float(scale[1])
    if not hi - lo > 0:
        raise ValueError(f"scale span must be positive, got {scale}")
    rows = []
    for row in grid.cells:
        px = []
        for c in row:
            v = getattr(c, metric)
            # point counts exist for every cell; error metrics only for fitted ones
            if metric != "point_count" and (c.status != OK or v is None or math.isnan(v)):
                px.append(SENTINEL)
                continue
            t = min(max((float(v) - lo) / (hi - lo), 0.0), 1.0)
            px.append(_ramp(t))
        rows.append(px)
    return rows


def render_heatmap(grid: ErrorGrid, metric: str, path, scale: tuple[float, float]) -> None:
    pixels = heatmap_pixels(grid, metric, scale)
    h, w = len(pixels), len(pixels[0]) if pixels else 0
    with open(Path(path), "w") as fh:
        fh.write(f"P3\n# {metric} scale {scale[0]:g}..{scale[1]:g}\n{w} {h}\n255\n")
        for row in pixels:
            fh.write(" ".join(f"{r} {g} {b}" for r, g, b in row))
            fh.write("\n")


def read_ppm(path) -> np.ndarray:
    """Decode a plain (P3) PPM into an (h, w, 3) uint8 array."""
    tokens = []
    with open(Path(path)) as fh:
        for line in fh:
            tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P3":
        raise ValueError("not a plain PPM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    if data.size != w * h * 3 or maxval != 255:
        raise ValueError("truncated PPM")
    return data.reshape(h, w, 3).astype(np.uint8)


def read_baseline_csv(path) -> list[BaselineSample]:
    """External ``position_m,error_m`` trace, sorted by position."""
    path = Path(path)
    out = []
    seen = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if [h.strip() for h in header or []] != BASELINE_HEADER:
            raise CsvFormatError(f"{path}:1: expected header position_m,error_m")
        for lineno, row in enumerate(r, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise CsvFormatError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                pos, err = float(row[0]), float(row[1])
            except ValueError as e:
                raise CsvFormatError(f"{path}:{lineno}: {e}") from e
            if not (math.isfinite(pos) and math.isfinite(err)):
                raise CsvFormatError(f"{path}:{lineno}: non-finite value")
            if pos in seen:
                raise CsvFormatError(f"{path}:{lineno}: duplicate position {pos} (first at line {seen[pos]})")
            seen[pos] = lineno
            out.append(BaselineSample(pos, err))
    return sorted(out)


def write_trace_csv(trace, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for t in trace:
            ok = t.status == OK
            w.writerow([_fmt(float(t.position)), _fmt(t.error if ok else None), t.status,
                        _fmt(t.off_by_90 if ok else None), _fmt(t.yaw_error if ok else None), t.point_count])


def read_trace_csv(path) -> list[TrajectorySample]:
    out = []
    with open(Path(path), newline="") as fh:
        r = csv.reader(fh)
        if next(r, None) != TRACE_HEADER:
            raise CsvFormatError(f"{path}: expected header {','.join(TRACE_HEADER)}")
        for lineno, row in enumerate(r, start=2):
            try:
                pos, err, st, off, ye, n = row
                out.append(TrajectorySample(float(pos), _float(err), st, _bool(off), _float(ye), int(n)))
            except ValueError as e:
                raise CsvFormatError(f"{path}:{lineno}: {e}") from e
    return out


def write_summary_csv(rows, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["range_min_m", "range_max_m", "n_ok", "n_failed", "mae_m", "p25_m", "p50_m", "p75_m"])
        for s in rows:
            stats = ["empty"] * 4 if s.empty else [_fmt(s.mae), _fmt(s.p25), _fmt(s.p50), _fmt(s.p75)]
            w.writerow([_fmt(float(s.range[0])), _fmt(float(s.range[1])), s.n_ok, s.n_failed, *stats])


def write_comparison_csv(rows, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["position_m", "roadside_error_m", "status", "baseline_position_m", "baseline_error_m", "matched"])
        for j in rows:
            w.writerow([_fmt(float(j.position)), _fmt(j.error if j.status == OK else None), j.status,
                        _fmt(j.baseline_position), _fmt(j.baseline_error), _fmt(j.matched)])
