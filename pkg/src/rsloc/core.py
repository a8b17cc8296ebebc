"""Geometric value types and angle conventions shared across the package.

World frame is z-up with the ground plane at z = 0.  Angles are degrees at
every public boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np

RECT_TOL = 1e-9

XY = Tuple[float, float]


class DegenerateGeometryError(ValueError):
    """Input geometry cannot define the requested shape."""


class Point3(NamedTuple):
    x: float
    y: float
    z: float


def _require_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite value: {v!r}")


def normalize_yaw(angle: float) -> float:
    """Wrap ``angle`` (degrees) into [0, 360)."""
    _require_finite(angle)
    out = math.fmod(angle, 360.0)
    if out < 0.0:
        out += 360.0
    # fmod of a tiny negative number can round up to exactly 360
    if out >= 360.0:
        out = 0.0
    return out + 0.0


def yaw_error_mod90(estimated: float, truth: float, tolerance: float = 15.0) -> tuple[float, bool]:
    """Heading error folded onto the quarter turn.

    Returns ``(error, off_by_90)`` where ``error`` lies in [0, 45] and
    ``off_by_90`` is set when the closest fold is an odd multiple of 90 and
    the residual is below ``tolerance``.
    """
    _require_finite(estimated, truth)
    diff = estimated - truth
    quarter = math.floor(diff / 90.0 + 0.5)
    error = abs(diff - 90.0 * quarter)
    error = min(error, 45.0)
    off = (quarter % 2 == 1) and error < tolerance
    return error, off


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    yaw: float

    def __post_init__(self) -> None:
        _require_finite(self.x, self.y, self.yaw)
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))


@dataclass(frozen=True)
class VehicleDims:
    """Vehicle extents; ``length`` is the long footprint edge, ``width`` the short one."""

    length: float
    width: float
    height: float

    def __post_init__(self) -> None:
        _require_finite(self.length, self.width, self.height)
        if not 0.0 < self.width <= self.length:
            raise ValueError(f"need 0 < width <= length, got width={self.width}, length={self.length}")
        if self.height <= 0.0:
            raise ValueError(f"height must be positive, got {self.height}")

    @property
    def footprint_area(self) -> float:
        return self.length * self.width


def _signed_area(c: np.ndarray) -> float:
    x, y = c[:, 0], c[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True)
class Obb2D:
    """Oriented rectangle in the ground plane.

    Corners may be given in either winding and starting anywhere; they are
    stored counter-clockwise starting from the lowest (y, x) corner so equal
    rectangles compare equal regardless of labelling.
    """

    corners: tuple[XY, XY, XY, XY]

    def __post_init__(self) -> None:
        c = np.asarray(self.corners, dtype=float)
        if c.shape != (4, 2) or not np.all(np.isfinite(c)):
            raise DegenerateGeometryError("need four finite (x, y) corners")
        edges = np.roll(c, -1, axis=0) - c
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        if np.any(lengths <= RECT_TOL):
            raise DegenerateGeometryError(f"zero-length edge in {c.tolist()}")
        if abs(lengths[0] - lengths[2]) > RECT_TOL or abs(lengths[1] - lengths[3]) > RECT_TOL:
            raise DegenerateGeometryError("opposite edges differ in length")
        for i in range(4):
            a, b = edges[i], edges[(i + 1) % 4]
            cosang = float(np.dot(a, b)) / (lengths[i] * lengths[(i + 1) % 4])
            if abs(math.asin(max(-1.0, min(1.0, cosang)))) > RECT_TOL:
                raise DegenerateGeometryError("adjacent edges are not orthogonal")
        if _signed_area(c) < 0.0:
            c = c[::-1]
        start = min(range(4), key=lambda i: (c[i, 1], c[i, 0]))
        c = np.roll(c, -start, axis=0)
        object.__setattr__(self, "corners", tuple((float(x), float(y)) for x, y in c))

    @classmethod
    def from_center(cls, center: Sequence[float], yaw: float, long_edge: float, short_edge: float) -> "Obb2D":
        """Rectangle with its long edge pointing along ``yaw`` degrees."""
        if not 0.0 < short_edge <= long_edge:
            raise DegenerateGeometryError(f"bad edges {long_edge} x {short_edge}")
        rad = math.radians(yaw)
        u = np.array([math.cos(rad), math.sin(rad)]) * (long_edge / 2.0)
        v = np.array([-math.sin(rad), math.cos(rad)]) * (short_edge / 2.0)
        c = np.asarray(center, dtype=float)
        return cls(tuple(map(tuple, (c - u - v, c + u - v, c + u + v, c - u + v))))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.corners, dtype=float)

    @property
    def center(self) -> XY:
        m = self.as_array().mean(axis=0)
        return float(m[0]), float(m[1])

    @property
    def edge_lengths(self) -> tuple[float, float]:
        c = self.as_array()
        return float(np.hypot(*(c[1] - c[0]))), float(np.hypot(*(c[2] - c[1])))

    @property
    def long_edge(self) -> float:
        return max(self.edge_lengths)

    @property
    def short_edge(self) -> float:
        return min(self.edge_lengths)

    @property
    def area(self) -> float:
        a, b = self.edge_lengths
        return a * b

    @property
    def yaw(self) -> float:
        """Direction of the long edge, degrees in [0, 180)."""
        c = self.as_array()
        e0, e1 = self.edge_lengths
        d = c[1] - c[0] if e0 >= e1 else c[2] - c[1]
        ang = math.degrees(math.atan2(d[1], d[0])) % 180.0
        return 0.0 if ang >= 180.0 else ang
