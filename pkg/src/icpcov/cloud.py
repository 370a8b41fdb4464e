"""Point-cloud container and geometric primitives.

Clouds are immutable after construction; all operations return new
clouds. Nearest-neighbor queries go through a kd-tree and are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyCloud, TooFewPoints
from .liegroup import Pose


@dataclass(frozen=True)
class PointCloud:
    """Points (n, 3) in meters, optional unit normals (n, 3).

    Coordinates must be finite; normals, when present, must match the
    point count and have unit norm within 1e-6.
    """

    points: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise ValueError("cloud coordinates must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = np.array(self.normals, dtype=float).reshape(-1, 3)
            if nrm.shape[0] != pts.shape[0]:
                raise ValueError("normals length must match point count")
            if not np.all(np.isfinite(nrm)):
                raise ValueError("normals must be finite")
            if nrm.shape[0] and np.max(np.abs(np.linalg.norm(nrm, axis=1) - 1.0)) > 1e-6:
                raise ValueError("normals must have unit norm")
            nrm.flags.writeable = False
            object.__setattr__(self, "normals", nrm)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def has_normals(self) -> bool:
        return self.normals is not None


def voxel_downsample(cloud: PointCloud, voxel: float) -> PointCloud:
    """One centroid per occupied voxel; voxel id = floor(coord / voxel).

    Output is sorted by voxel id (x, then y, then z), so the result is a
    deterministic function of the input. Normals are discarded.
    """
    if voxel <= 0:
        raise ValueError("voxel size must be positive")
    pts = cloud.points
    if len(cloud) == 0:
        return PointCloud(np.zeros((0, 3)))
    ids = np.floor(pts / voxel).astype(np.int64)
    order = np.lexsort((ids[:, 2], ids[:, 1], ids[:, 0]))
    ids_sorted = ids[order]
    pts_sorted = pts[order]
    boundary = np.any(np.diff(ids_sorted, axis=0) != 0, axis=1)
    starts = np.concatenate([[0], np.nonzero(boundary)[0] + 1])
    sums = np.add.reduceat(pts_sorted, starts, axis=0)
    counts = np.diff(np.concatenate([starts, [len(pts_sorted)]]))
    return PointCloud(sums / counts[:, None])


class NnIndex:
    """Immutable exact nearest-neighbor index over a fixed cloud."""

    def __init__(self, cloud: PointCloud):
        if len(cloud) == 0:
            raise EmptyCloud("cannot index an empty cloud")
        self._points = cloud.points
        self._tree = cKDTree(cloud.points)

    def nearest(self, q: np.ndarray) -> tuple[int, float]:
        """Nearest point id and distance; ties go to the lowest id."""
        q = np.asarray(q, dtype=float).reshape(3)
        d, i = self._tree.query(q)
        # Re-rank every candidate at the winning radius so exact ties
        # resolve to the lowest id regardless of tree layout.
        cand = self._tree.query_ball_point(q, d * (1.0 + 1e-12) + 1e-300)
        if not cand:
            return int(i), float(d)
        cand = np.asarray(cand)
        dists = np.linalg.norm(self._points[cand] - q, axis=1)
        dmin = dists.min()
        best = int(cand[dists == dmin].min())
        return best, float(dmin)

    def nearest_many(self, qs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized nearest query (no tie re-ranking)."""
        d, i = self._tree.query(np.asarray(qs, dtype=float), workers=1)
        return np.asarray(i, dtype=np.int64), np.asarray(d, dtype=float)


def build_index(cloud: PointCloud) -> NnIndex:
    return NnIndex(cloud)


def nearest(idx: NnIndex, q: np.ndarray) -> tuple[int, float]:
    return idx.nearest(q)


def estimate_normals(cloud: PointCloud, k: int = 10) -> PointCloud:
    """Per-point normals from k-NN PCA (smallest scatter eigenvector).

    Signs point toward the sensor origin at (0, 0, 0); when the origin
    lies in the local tangent plane the tie resolves toward +z, then +x,
    then +y, so results are stable under rotations about z.
    """
    if k < 3:
        raise ValueError("normal estimation needs k >= 3")
    n = len(cloud)
    if n < k:
        raise TooFewPoints(f"{n} points < neighborhood size {k}")
    pts = cloud.points
    tree = cKDTree(pts)
    _, nbr = tree.query(pts, k=k, workers=1)
    neigh = pts[nbr]                                # (n, k, 3)
    centered = neigh - neigh.mean(axis=1, keepdims=True)
    scatter = np.einsum("nki,nkj->nij", centered, centered)
    _, vecs = np.linalg.eigh(scatter)
    normals = vecs[:, :, 0]                         # smallest eigenvalue
    toward = np.einsum("ni,ni->n", normals, -pts)
    scale = np.maximum(np.linalg.norm(pts, axis=1), 1.0)
    flip = np.where(
        np.abs(toward) > 1e-9 * scale,
        np.sign(toward),
        _axis_tiebreak(normals),
    )
    return PointCloud(pts, normals * flip[:, None])


def _axis_tiebreak(normals: np.ndarray) -> np.ndarray:
    sign = np.sign(normals[:, 2])
    sign = np.where(sign == 0, np.sign(normals[:, 0]), sign)
    sign = np.where(sign == 0, np.sign(normals[:, 1]), sign)
    return np.where(sign == 0, 1.0, sign)


def transform_cloud(cloud: PointCloud, T: Pose) -> PointCloud:
    """Apply a rigid transform: points p -> R p + t, normals n -> R n."""
    pts = cloud.points @ T.R.T + T.t
    nrm = cloud.normals @ T.R.T if cloud.has_normals else None
    return PointCloud(pts, nrm)
