"""Point-to-plane ICP refining an initial pose against a reference map.

The pose update is right-multiplicative (pose <- pose * exp(delta)), so
the solved increment and the resulting registration errors live in the
body/sensor frame, matching the twist conventions in liegroup.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import NnIndex, PointCloud
from .errors import NumericalFailure, TooFewCorrespondences
from .liegroup import Pose, compose, exp_se3


@dataclass(frozen=True)
class IcpConfig:
    max_iterations: int = 30
    translation_tol: float = 1e-4      # m
    rotation_tol: float = 1e-5         # rad
    max_corr_dist: float = 2.0         # m
    min_correspondences: int = 50
    degenerate_threshold: float = 1e6  # normal-equation condition number

    def __post_init__(self):
        if min(self.max_iterations, self.translation_tol, self.rotation_tol,
               self.max_corr_dist, self.min_correspondences,
               self.degenerate_threshold) <= 0:
            raise ValueError("all ICP configuration values must be positive")
        if self.min_correspondences < 6:
            raise ValueError("need at least 6 correspondences to solve for 6 DoF")


@dataclass(frozen=True)
class IcpResult:
    pose: Pose
    converged: bool
    iterations: int
    final_rmse: float
    degenerate: bool
    condition: float
    rmse_history: tuple[float, ...]


def solve_normal_equations(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve (A + lambda I) delta = b with trace-scaled Tikhonov jitter.

    Returns the increment and the condition number max_eig / min_eig of
    the unregularized A (min_eig floored at 1e-300).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise NumericalFailure("non-finite normal equations")
    eigs = np.linalg.eigvalsh(0.5 * (A + A.T))
    condition = float(eigs[-1] / max(eigs[0], 1e-300))
    lam = 1e-9 * np.trace(A) / 6.0
    try:
        delta = np.linalg.solve(A + lam * np.eye(6), b)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure("normal-equation solve failed") from e
    if not np.all(np.isfinite(delta)):
        raise NumericalFailure("non-finite solution")
    return delta, condition


def icp_point_to_plane(source: PointCloud, target: PointCloud, init: Pose,
                       cfg: IcpConfig = IcpConfig()) -> IcpResult:
    """Iterate correspondence search and linearized point-to-plane solves.

    Per iteration: transform the source by the current pose, match each
    source point to its nearest target point within max_corr_dist, and
    solve the 6x6 normal equations for the body-frame increment. Stops
    when both increment norms drop below their tolerances.
    """
    if not target.has_normals:
        raise ValueError("target cloud must carry normals")
    if len(source) == 0:
        raise ValueError("source cloud is empty")
    index = NnIndex(target)
    pose = init
    rmse_history: list[float] = []
    converged = False
    condition = 0.0
    iterations = 0

    for iterations in range(1, cfg.max_iterations + 1):
        moved = source.points @ pose.R.T + pose.t
        ids, dists = index.nearest_many(moved)
        mask = dists <= cfg.max_corr_dist
        n_corr = int(mask.sum())
        if n_corr < cfg.min_correspondences:
            raise TooFewCorrespondences(
                f"{n_corr} correspondences < minimum {cfg.min_correspondences}")
        p = source.points[mask]
        tp = moved[mask]
        q = target.points[ids[mask]]
        nrm = target.normals[ids[mask]]

        r0 = np.einsum("ij,ij->i", nrm, tp - q)
        rmse_history.append(float(np.sqrt(np.mean(r0 * r0))))

        m = nrm @ pose.R                    # rows are R^T n
        J = np.hstack([m, np.cross(p, m)])
        A = J.T @ J
        b = -(J.T @ r0)
        delta, condition = solve_normal_equations(A, b)
        pose = compose(pose, exp_se3(delta))
        if (np.linalg.norm(delta[:3]) < cfg.translation_tol
                and np.linalg.norm(delta[3:]) < cfg.rotation_tol):
            converged = True
            break

    return IcpResult(
        pose=pose,
        converged=converged,
        iterations=iterations,
        final_rmse=rmse_history[-1],
        degenerate=condition > cfg.degenerate_threshold,
        condition=condition,
        rmse_history=tuple(rmse_history),
    )
