"""L-shape rectangle fitting and dimension-based centre correction."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import XY, DegenerateGeometryError, Obb2D, VehicleDims

# scores within this relative margin of the best count as ties; keeps the
# chosen angle identical between the compiled and numpy kernels
_TIE_RTOL = 1e-12


class TooFewPointsError(ValueError):
    pass


@dataclass(frozen=True)
class LShapeConfig:
    angle_step: float = 1.0
    min_dist_clamp: float = 0.01
    min_points: int = 3

    def __post_init__(self) -> None:
        if not 0.0 < self.angle_step <= 15.0:
            raise ValueError(f"angle_step must be in (0, 15], got {self.angle_step}")
        if not self.min_dist_clamp > 0.0:
            raise ValueError(f"min_dist_clamp must be positive, got {self.min_dist_clamp}")
        if self.min_points < 3:
            raise ValueError(f"min_points must be >= 3, got {self.min_points}")

    def angles(self) -> np.ndarray:
        """Search grid in degrees over [0, 90)."""
        n = int(math.ceil(90.0 / self.angle_step - 1e-9))
        return self.angle_step * np.arange(n)


@dataclass(frozen=True)
class CorrectedEstimate:
    center: XY
    yaw: float
    alignment_point: XY
    off_by_90_suspect: bool


def _check_not_collinear(pts: np.ndarray) -> None:
    centred = pts - pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(centred, full_matrices=False)
    if sv[-1] == 0.0 or np.max(np.abs(centred @ vt[-1])) <= 1e-9:
        raise DegenerateGeometryError("points are collinear")


def rectangle_at(points: np.ndarray, theta_deg: float) -> Obb2D:
    """Axis extrema of ``points`` in the frame rotated by ``theta_deg``."""
    t = math.radians(theta_deg)
    e1 = np.array([math.cos(t), math.sin(t)])
    e2 = np.array([-math.sin(t), math.cos(t)])
    c1, c2 = points @ e1, points @ e2
    a0, a1, b0, b1 = c1.min(), c1.max(), c2.min(), c2.max()
    corners = [a * e1 + b * e2 for a, b in ((a0, b0), (a1, b0), (a1, b1), (a0, b1))]
    return Obb2D(tuple((float(x), float(y)) for x, y in corners))


def lshape_fit(points, config: LShapeConfig = LShapeConfig()) -> Obb2D:
    """Best-closeness rectangle around 2D footprint points.

    Each candidate angle scores every point by the reciprocal of its (clamped)
    distance to the nearer extreme edge, on both rectangle axes.  The highest
    total wins, smaller angle first on ties.
    """
    pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < config.min_points:
        raise TooFewPointsError(f"{len(pts)} points, need at least {config.min_points}")
    _check_not_collinear(pts)
    # shift to the centroid for conditioning; extrema are translation invariant
    origin = pts.mean(axis=0)
    local = np.ascontiguousarray(pts - origin)
    angles = config.angles()
    scores = kernels.closeness_scores(local, np.radians(angles), float(config.min_dist_clamp))
    best = int(np.flatnonzero(scores >= scores.max() * (1.0 - _TIE_RTOL))[0])
    box = rectangle_at(local, float(angles[best]))
    return Obb2D(tuple((x + origin[0], y + origin[1]) for x, y in box.corners))


def size_correct(box: Obb2D, dims: VehicleDims, lidar_xy) -> CorrectedEstimate:
    """Re-anchor the true-size footprint on the fitted corner nearest the LiDAR."""
    c = box.as_array()
    m = np.asarray(lidar_xy, dtype=float)[:2]
    d = np.hypot(*(c - m).T)
    i = int(np.argmin(d))  # first corner in CCW order on ties
    p = c[i]
    p_l, p_r = c[(i - 1) % 4], c[(i + 1) % 4]
    len_l, len_r = float(np.hypot(*(p_l - p))), float(np.hypot(*(p_r - p)))
    if len_l <= 0.0 or len_r <= 0.0:
        raise DegenerateGeometryError("zero-length edge at alignment corner")
    u_l, u_r = (p_l - p) / len_l, (p_r - p) / len_r
    if len_l < len_r:
        center = p + (u_l * dims.width + u_r * dims.length) / 2.0
    else:
        center = p + (u_r * dims.width + u_l * dims.length) / 2.0
    suspect = abs(box.long_edge - dims.width) < abs(box.long_edge - dims.length)
    return CorrectedEstimate(
        center=(float(center[0]), float(center[1])),
        yaw=box.yaw,
        alignment_point=(float(p[0]), float(p[1])),
        off_by_90_suspect=bool(suspect),
    )
