"""Distance x yaw heat-map sweep and straight-road trajectory evaluation."""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .boxfit import LShapeConfig, TooFewPointsError, lshape_fit, size_correct
from .core import DegenerateGeometryError, Pose2D, VehicleDims, yaw_error_mod90
from .lidar import DEFAULT_VEHICLE, Box, LidarSpec, SceneModel, cast_frame, vehicle_point_count
from .perception import ReferenceFrame, filter_background, filter_ground, project_to_plane

log = logging.getLogger(__name__)

OK = "ok"
TOO_FEW_POINTS = "too_few_points"
FIT_FAILED = "fit_failed"
STATUSES = (OK, TOO_FEW_POINTS, FIT_FAILED)

THREADS_ENV = "RSLOC_THREADS"


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def worker_count(requested: int | None = None) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


@dataclass(frozen=True)
class SweepConfig:
    lidar: LidarSpec = field(default_factory=LidarSpec.vlp16)
    vehicle: VehicleDims = DEFAULT_VEHICLE
    distance_min: float = 3.0
    distance_max: float = 40.0
    distance_step: float = 0.5
    yaw_step: float = 2.0
    correction_enabled: bool = False
    bearing: float = 0.0
    lshape: LShapeConfig = LShapeConfig()
    z_threshold: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if self.distance_min < 0.0:
            raise ValueError("distance_min must be >= 0")
        if not self.distance_step > 0.0:
            raise ValueError("distance_step must be positive")
        if self.distance_max < self.distance_min:
            raise ValueError("distance_max must be >= distance_min")
        if not self.yaw_step > 0.0:
            raise ValueError("yaw_step must be positive")
        k = 360.0 / self.yaw_step
        if abs(k - round(k)) > 1e-9:
            raise ValueError("yaw_step must divide 360 evenly")

    @property
    def distances(self) -> np.ndarray:
        return _grid(self.distance_min, self.distance_max, self.distance_step)

    @property
    def yaws(self) -> np.ndarray:
        return self.yaw_step * np.arange(int(round(360.0 / self.yaw_step)))


@dataclass(frozen=True)
class CellMetrics:
    distance: float
    yaw: float
    center_error: float = math.nan
    bbox_area_error: float = math.nan
    yaw_error: float = math.nan
    off_by_90: bool | None = None
    point_count: int = 0
    status: str = OK

    def same_as(self, other: "CellMetrics") -> bool:
        """Equality that treats NaN sentinels as equal."""
        def eq(a, b):
            return (isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b)) or a == b
        return all(eq(getattr(self, f), getattr(other, f)) for f in self.__dataclass_fields__)


@dataclass
class ErrorGrid:
    distances: np.ndarray
    yaws: np.ndarray
    cells: list[list[CellMetrics]]
    config: SweepConfig | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.distances), len(self.yaws)

    def metric(self, name: str) -> np.ndarray:
        """Dense array of one field; failed cells carry NaN for error metrics."""
        return np.array([[float(getattr(c, name)) if getattr(c, name) is not None else math.nan for c in row]
                         for row in self.cells])

    def status(self) -> np.ndarray:
        return np.array([[c.status for c in row] for row in self.cells])

    def iter_cells(self):
        for row in self.cells:
            yield from row


def _evaluate(xy: np.ndarray, truth: Pose2D, dims: VehicleDims, lidar_xy, lshape: LShapeConfig,
              correct: bool, point_count: int, distance: float, yaw: float) -> tuple[CellMetrics, object]:
    base = dict(distance=float(distance), yaw=float(yaw), point_count=int(point_count))
    if len(xy) < lshape.min_points:
        return CellMetrics(status=TOO_FEW_POINTS, **base), None
    try:
        box = lshape_fit(xy, lshape)
        corr = size_correct(box, dims, lidar_xy) if correct else None
    except TooFewPointsError:
        return CellMetrics(status=TOO_FEW_POINTS, **base), None
    except DegenerateGeometryError:
        return CellMetrics(status=FIT_FAILED, **base), None
    center = corr.center if corr is not None else box.center
    yaw_err, off = yaw_error_mod90(box.yaw, truth.yaw)
    cell = CellMetrics(
        center_error=math.hypot(center[0] - truth.x, center[1] - truth.y),
        bbox_area_error=abs(box.area - dims.footprint_area),
        yaw_error=yaw_err,
        off_by_90=off,
        status=OK,
        **base,
    )
    return cell, (box, corr)


def sweep_cell(config: SweepConfig, i: int, j: int) -> CellMetrics:
    d = float(config.distances[i])
    yaw = float(config.yaws[j])
    mx, my, _ = config.lidar.mount
    b = math.radians(config.bearing)
    truth = Pose2D(mx + d * math.cos(b), my + d * math.sin(b), yaw)
    scene = SceneModel(config.vehicle, truth)
    seed = config.seed * 1_000_003 + i * len(config.yaws) + j
    cloud = cast_frame(config.lidar, scene, seed=seed, frame_id=f"d{d:g}_y{yaw:g}")
    fg = filter_ground(cloud, config.z_threshold)
    cell, _ = _evaluate(project_to_plane(fg), truth, config.vehicle, (mx, my), config.lshape,
                        config.correction_enabled, vehicle_point_count(cloud, scene), d, yaw)
    return cell


def _sweep_row(args) -> list[CellMetrics]:
    config, i = args
    return [sweep_cell(config, i, j) for j in range(len(config.yaws))]


def run_sweep(config: SweepConfig, workers: int | None = None) -> ErrorGrid:
    """Evaluate every (distance, yaw) cell; failures are recorded, never raised."""
    rows = [(config, i) for i in range(len(config.distances))]
    n = worker_count(workers)
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            cells = list(pool.map(_sweep_row, rows))
    else:
        cells = [_sweep_row(r) for r in rows]
    return ErrorGrid(config.distances.copy(), config.yaws.copy(), cells, config)


@dataclass(frozen=True)
class TrajectoryConfig:
    lidar: LidarSpec = field(default_factory=LidarSpec.vlp16)
    vehicle: VehicleDims = DEFAULT_VEHICLE
    road_heading: float = 0.0
    lateral_offset: float = 4.0
    range_min: float = -50.0
    range_max: float = 50.0
    sample_step: float = 0.5
    occluders: tuple[Box, ...] = ()
    epsilon: float = 0.1
    lshape: LShapeConfig = LShapeConfig()
    seed: int = 0
    baseline_trace: tuple["BaselineSample", ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "occluders", tuple(self.occluders))
        if not self.sample_step > 0.0:
            raise ValueError("sample_step must be positive")
        if self.range_max < self.range_min:
            raise ValueError("longitudinal range is empty")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")

    @property
    def positions(self) -> np.ndarray:
        return _grid(self.range_min, self.range_max, self.sample_step)

    def pose_at(self, s: float) -> Pose2D:
        mx, my, _ = self.lidar.mount
        h = math.radians(self.road_heading)
        ux, uy = math.cos(h), math.sin(h)
        return Pose2D(mx + s * ux - self.lateral_offset * uy, my + s * uy + self.lateral_offset * ux,
                      self.road_heading)


class TrajectorySample(NamedTuple):
    position: float
    error: float
    status: str
    off_by_90: bool | None = None
    yaw_error: float = math.nan
    point_count: int = 0
    off_by_90_suspect: bool | None = None


class BaselineSample(NamedTuple):
    position: float
    error: float


def run_trajectory(config: TrajectoryConfig) -> list[TrajectorySample]:
    """Drive the vehicle along the road; localise it with background subtraction and size correction."""
    base_scene = SceneModel(None, occluders=config.occluders)
    reference = ReferenceFrame(cast_frame(config.lidar, base_scene, seed=config.seed, frame_id="reference"))
    mx, my, _ = config.lidar.mount
    out = []
    for k, s in enumerate(config.positions):
        s = float(s)
        truth = config.pose_at(s)
        scene = SceneModel(config.vehicle, truth, config.occluders)
        cloud = cast_frame(config.lidar, scene, seed=config.seed + 1 + k, frame_id=f"s{s:g}")
        fg = filter_background(cloud, reference, config.epsilon)
        cell, fit = _evaluate(project_to_plane(fg), truth, config.vehicle, (mx, my), config.lshape,
                              True, vehicle_point_count(cloud, scene), s, truth.yaw)
        out.append(TrajectorySample(
            position=s,
            error=cell.center_error,
            status=cell.status,
            off_by_90=cell.off_by_90,
            yaw_error=cell.yaw_error,
            point_count=cell.point_count,
            off_by_90_suspect=fit[1].off_by_90_suspect if fit else None,
        ))
    return out


@dataclass(frozen=True)
class RangeSummary:
    range: tuple[float, float]
    n_ok: int
    n_failed: int
    mae: float | None
    p25: float | None
    p50: float | None
    p75: float | None

    @property
    def empty(self) -> bool:
        return self.n_ok == 0


def summarize(trace: Sequence, ranges: Sequence[tuple[float, float]]) -> list[RangeSummary]:
    """Per-range mean absolute error and quartiles over ``ok`` samples.

    Quartiles use linear interpolation between order statistics.  A range with
    no usable sample is reported with ``None`` statistics.
    """
    rows = []
    for lo, hi in ranges:
        inside = [t for t in trace if lo <= t.position <= hi]
        errs = np.array([abs(t.error) for t in inside if getattr(t, "status", OK) == OK], dtype=float)
        n_fail = len(inside) - len(errs)
        if len(errs) == 0:
            rows.append(RangeSummary((lo, hi), 0, n_fail, None, None, None, None))
            continue
        p25, p50, p75 = np.percentile(errs, [25, 50, 75])
        rows.append(RangeSummary((lo, hi), len(errs), n_fail, float(errs.mean()), float(p25), float(p50), float(p75)))
    return rows


def effective_range(trace: Sequence[TrajectorySample], threshold: float = 0.3, quantile: float = 75.0) -> float:
    """Largest R such that for every symmetric window [-R', R'] with R' <= R the
    ``quantile`` of localisation error stays below ``threshold``.

    Failed samples count as unbounded error: losing the vehicle is not accuracy.
    """
    radii = sorted({abs(t.position) for t in trace})
    best = 0.0
    for r in radii:
        errs = [t.error if t.status == OK else math.inf for t in trace if abs(t.position) <= r]
        with np.errstate(invalid="ignore"):  # inf - inf between two failures reads as nan
            q = float(np.percentile(errs, quantile))
        if q < threshold:  # nan compares false, as an unbounded error should
            best = r
        else:
            break
    return best


class JoinedSample(NamedTuple):
    position: float
    error: float
    status: str
    baseline_position: float | None
    baseline_error: float | None
    matched: bool


def compare_with_baseline(trace: Sequence, baseline: Sequence[BaselineSample], sample_step: float) -> list[JoinedSample]:
    """Nearest-position join of a run against an external error trace.

    Samples with no baseline position within ``sample_step / 2`` are kept and
    marked unmatched.
    """
    if not baseline:
        raise ValueError("baseline trace is empty")
    bpos = np.array([b.position for b in baseline], dtype=float)
    tpos = [t.position for t in trace]
    if not trace or max(tpos) < bpos.min() - sample_step / 2 or min(tpos) > bpos.max() + sample_step / 2:
        raise ValueError("baseline and trace position ranges are disjoint")
    order = np.argsort(bpos)
    bsorted = bpos[order]
    out = []
    for t in trace:
        k = int(np.searchsorted(bsorted, t.position))
        cands = [c for c in (k - 1, k) if 0 <= c < len(bsorted)]
        c = min(cands, key=lambda c: (abs(bsorted[c] - t.position), c))
        b = baseline[int(order[c])]
        ok = abs(b.position - t.position) <= sample_step / 2 + 1e-12
        status = getattr(t, "status", OK)
        out.append(JoinedSample(t.position, t.error, status,
                                b.position if ok else None, b.error if ok else None, ok))
    return out
