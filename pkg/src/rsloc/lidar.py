"""Deterministic spinning-LiDAR ray caster over a box-world scene."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .core import Pose2D, VehicleDims

TAG_NONE = -1
TAG_GROUND = 0
TAG_VEHICLE = 1
TAG_OCCLUDER0 = 2

VLP16_ELEVATIONS = tuple(float(e) for e in range(-15, 16, 2))

# Velodyne VLP-32C published channel table, sorted bottom to top.
VLP32C_ELEVATIONS = (
    -25.0, -15.639, -11.31, -8.843, -7.254, -6.148, -5.333, -4.667,
    -4.0, -3.667, -3.333, -3.0, -2.667, -2.333, -2.0, -1.667,
    -1.333, -1.0, -0.667, -0.333, 0.0, 0.333, 0.667, 1.0,
    1.333, 1.667, 2.333, 3.333, 4.667, 7.0, 10.333, 15.0,
)
VLP32C_UNIFORM_ELEVATIONS = tuple(float(e) for e in np.linspace(-25.0, 15.0, 32))

# Lexus RX450h footprint (public spec sheet).
DEFAULT_VEHICLE = VehicleDims(length=4.89, width=1.90, height=1.72)


@dataclass(frozen=True)
class LidarSpec:
    elevation_angles: tuple[float, ...]
    azimuth_step: float = 0.2
    max_range: float = 100.0
    mount: tuple[float, float, float] = (0.0, 0.0, 2.0)
    mount_yaw: float = 0.0
    range_noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        el = tuple(float(e) for e in self.elevation_angles)
        object.__setattr__(self, "elevation_angles", el)
        object.__setattr__(self, "mount", tuple(float(v) for v in self.mount))
        if not el:
            raise ValueError("elevation_angles must be non-empty")
        if any(b <= a for a, b in zip(el, el[1:])):
            raise ValueError("elevation_angles must be strictly increasing")
        if any(not -90.0 < e < 90.0 for e in el):
            raise ValueError("elevation angles must lie in (-90, 90)")
        if not 0.0 < self.azimuth_step <= 10.0:
            raise ValueError(f"azimuth_step must be in (0, 10], got {self.azimuth_step}")
        if not self.max_range > 0.0:
            raise ValueError(f"max_range must be positive, got {self.max_range}")
        if not self.range_noise_sigma >= 0.0:
            raise ValueError(f"range_noise_sigma must be >= 0, got {self.range_noise_sigma}")

    @classmethod
    def vlp16(cls, **kw) -> "LidarSpec":
        return cls(VLP16_ELEVATIONS, **kw)

    @classmethod
    def vlp32c(cls, uniform: bool = False, **kw) -> "LidarSpec":
        return cls(VLP32C_UNIFORM_ELEVATIONS if uniform else VLP32C_ELEVATIONS, **kw)

    @property
    def azimuths(self) -> np.ndarray:
        n = int(math.floor(360.0 / self.azimuth_step + 1e-9))
        return self.mount_yaw + self.azimuth_step * np.arange(n)

    def ray_directions(self) -> np.ndarray:
        """Unit directions, channel-major: row ``c * n_az + k``."""
        el = np.radians(np.asarray(self.elevation_angles))[:, None]
        az = np.radians(self.azimuths)[None, :]
        d = np.stack(
            [np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.broadcast_to(np.sin(el), (el.shape[0], az.shape[1]))],
            axis=-1,
        )
        return np.ascontiguousarray(d.reshape(-1, 3))


@dataclass(frozen=True)
class Box:
    """Upright box standing on ``z_base``; ``length`` runs along ``yaw``."""

    center: tuple[float, float]
    length: float
    width: float
    height: float
    yaw: float = 0.0
    z_base: float = 0.0

    def __post_init__(self) -> None:
        if min(self.length, self.width, self.height) <= 0.0:
            raise ValueError("box dimensions must be positive")
        if self.z_base < 0.0:
            raise ValueError("box must sit at or above the ground plane")

    def row(self) -> list[float]:
        r = math.radians(self.yaw)
        return [self.center[0], self.center[1], math.cos(r), math.sin(r),
                self.length / 2.0, self.width / 2.0, self.z_base, self.z_base + self.height]


# tiny box far beyond any max_range, keeps tag numbering when no vehicle is present
_PARKED_SLOT = [1e12, 1e12, 1.0, 0.0, 0.5, 0.5, 0.0, 1.0]


@dataclass(frozen=True)
class SceneModel:
    vehicle: VehicleDims | None
    pose: Pose2D = Pose2D(0.0, 0.0, 0.0)
    occluders: tuple[Box, ...] = ()
    ground: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "occluders", tuple(self.occluders))

    def vehicle_box(self) -> Box | None:
        if self.vehicle is None:
            return None
        v = self.vehicle
        return Box((self.pose.x, self.pose.y), v.length, v.width, v.height, self.pose.yaw)

    def without_vehicle(self) -> "SceneModel":
        return SceneModel(None, self.pose, self.occluders, self.ground)

    def box_rows(self) -> np.ndarray:
        # row 0 is always the vehicle slot so tags stay stable
        vb = self.vehicle_box()
        rows = [vb.row() if vb else _PARKED_SLOT]
        rows += [b.row() for b in self.occluders]
        return np.ascontiguousarray(np.asarray(rows, dtype=float))


@dataclass
class PointCloud:
    """LiDAR returns in world frame plus the tag of the surface each came from."""

    points: np.ndarray
    tags: np.ndarray = field(default=None)
    frame_id: str = ""
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if self.tags is None:
            self.tags = np.full(len(self.points), TAG_NONE, dtype=np.int32)
        self.tags = np.asarray(self.tags, dtype=np.int32)
        if len(self.tags) != len(self.points):
            raise ValueError("tags and points differ in length")

    def __len__(self) -> int:
        return len(self.points)

    def subset(self, mask) -> "PointCloud":
        return PointCloud(self.points[mask], self.tags[mask], self.frame_id, self.origin)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "z", "surface_tag"])
            for (x, y, z), t in zip(self.points.tolist(), self.tags.tolist()):
                w.writerow([repr(x), repr(y), repr(z), t])


@lru_cache(maxsize=8)
def _directions(spec: LidarSpec) -> np.ndarray:
    d = spec.ray_directions()
    d.setflags(write=False)
    return d


def cast_frame(spec: LidarSpec, scene: SceneModel, seed: int = 0, frame_id: str = "") -> PointCloud:
    """Sweep every (channel, azimuth) ray once and keep its nearest hit."""
    origin = np.asarray(spec.mount, dtype=float)
    dirs = _directions(spec)
    t, tag = kernels.cast_rays(origin, dirs, scene.box_rows(), bool(scene.ground), float(spec.max_range))
    hit = tag >= 0
    rng_t = t
    if spec.range_noise_sigma > 0.0:
        noise = np.random.default_rng(seed).normal(0.0, spec.range_noise_sigma, size=len(t))
        rng_t = np.clip(t + noise, 0.0, spec.max_range)
    pts = origin + dirs[hit] * rng_t[hit, None]
    return PointCloud(pts, tag[hit], frame_id, tuple(spec.mount))


def vehicle_point_count(cloud: PointCloud, scene: SceneModel | None = None) -> int:
    return int(np.count_nonzero(cloud.tags == TAG_VEHICLE))


def blind_radius(spec: LidarSpec, z: float) -> float:
    """Horizontal radius around the mount inside which no beam reaches height ``z``.

    Infinite when even the lowest beam never descends to ``z``.
    """
    low = min(spec.elevation_angles)
    drop = spec.mount[2] - z
    if low >= 0.0:
        return math.inf if drop > 0 else 0.0
    return max(drop, 0.0) / math.tan(math.radians(-low))
