"""Foreground extraction: reference-frame subtraction and ground removal."""
from __future__ import annotations

import warnings

import numpy as np
from scipy.spatial import cKDTree

from .lidar import PointCloud


class ReferenceFrame:
    """Vehicle-free frame with an exact nearest-neighbour index over its points."""

    def __init__(self, cloud: PointCloud):
        self.cloud = cloud
        self.points = np.array(cloud.points, dtype=float)
        self.points.setflags(write=False)
        self.index = cKDTree(self.points) if len(self.points) else None

    def __len__(self) -> int:
        return len(self.points)

    def nearest(self, query: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Squared distance to, and index of, the closest reference point."""
        query = np.asarray(query, dtype=float).reshape(-1, 3)
        if self.index is None:
            return np.full(len(query), np.inf), np.full(len(query), -1)
        _, idx = self.index.query(query, k=1)
        # recompute so the threshold test does not depend on the tree's rounding
        diff = query - self.points[idx]
        return np.einsum("ij,ij->i", diff, diff), idx


def filter_background(current: PointCloud, reference: ReferenceFrame, epsilon: float = 0.1) -> PointCloud:
    """Keep points whose nearest reference point is farther than ``epsilon``."""
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if len(reference) == 0:
        warnings.warn("empty reference frame: every point treated as foreground", RuntimeWarning, stacklevel=2)
        return current.subset(np.ones(len(current), dtype=bool))
    if len(current) == 0:
        return current.subset(np.zeros(0, dtype=bool))
    d2, _ = reference.nearest(current.points)
    return current.subset(d2 > epsilon * epsilon)


def filter_ground(cloud: PointCloud, z_threshold: float = 0.05) -> PointCloud:
    if z_threshold < 0.0:
        raise ValueError(f"z_threshold must be >= 0, got {z_threshold}")
    return cloud.subset(cloud.points[:, 2] > z_threshold)


def project_to_plane(cloud: PointCloud) -> np.ndarray:
    """(n, 2) array of the x, y coordinates, order preserved."""
    return np.array(cloud.points[:, :2], dtype=float)
