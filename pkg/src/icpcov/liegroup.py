"""SO(3)/SE(3) operations on twists, poses, and 6x6 tangent covariances.

Conventions used throughout the package:

* A twist is a plain length-6 float array ``(u, w)``: translation part
  first (meters), axis-angle rotation part second (radians).
* 6x6 covariances follow the same block order (translation, rotation).
* Pose errors are right-multiplicative: a perturbed pose is
  ``compose(T, exp_se3(xi))`` and the error of an estimate ``That``
  against truth ``Tbar`` is ``log_se3(compose(inverse(Tbar), That))``,
  i.e. the twist lives in the body/sensor frame.
* Angles are radians everywhere; degrees appear only at configuration
  and report boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AngleNearPi, NotPSD

SMALL_ANGLE = 1e-8
_VALID_TOL = 1e-9


def skew(v: np.ndarray) -> np.ndarray:
    """3x3 skew-symmetric matrix such that skew(a) @ b == cross(a, b)."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True)
class Pose:
    """Rigid transform: world point = R @ p + t.

    R must be orthonormal with determinant +1 (checked to 1e-9 at
    construction). Arrays are copied and frozen.
    """

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        t = np.array(self.t, dtype=float).reshape(3)
        if R.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {R.shape}")
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(t))):
            raise ValueError("pose entries must be finite")
        err = np.linalg.norm(R.T @ R - np.eye(3))
        if err > _VALID_TOL:
            raise ValueError(f"rotation is not orthonormal (|R'R - I| = {err:.3g})")
        if abs(np.linalg.det(R) - 1.0) > _VALID_TOL:
            raise ValueError("rotation must have determinant +1")
        R.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    def as_matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        M = np.eye(4)
        M[:3, :3] = self.R
        M[:3, 3] = self.t
        return M

    @staticmethod
    def from_matrix(M: np.ndarray) -> "Pose":
        M = np.asarray(M, dtype=float)
        return Pose(M[:3, :3], M[:3, 3])

    def as_flat(self) -> np.ndarray:
        """Row-major 3x4 layout (12 numbers), the on-disk pose format."""
        return np.hstack([self.R, self.t.reshape(3, 1)]).reshape(12)

    @staticmethod
    def from_flat(v: np.ndarray) -> "Pose":
        v = np.asarray(v, dtype=float).reshape(3, 4)
        return Pose(v[:, :3], v[:, 3])


def compose(a: Pose, b: Pose) -> Pose:
    return Pose(a.R @ b.R, a.R @ b.t + a.t)


def inverse(a: Pose) -> Pose:
    Rt = a.R.T
    return Pose(Rt, -(Rt @ a.t))


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def so3_exp(w: np.ndarray) -> np.ndarray:
    """Rodrigues formula with a second-order Taylor fallback near zero."""
    w = np.asarray(w, dtype=float)
    angle = float(np.linalg.norm(w))
    W = skew(w)
    if angle < SMALL_ANGLE:
        return np.eye(3) + W + 0.5 * (W @ W)
    A = np.sin(angle) / angle
    B = (1.0 - np.cos(angle)) / (angle * angle)
    return np.eye(3) + A * W + B * (W @ W)


def so3_log(R: np.ndarray) -> np.ndarray:
    """Axis-angle vector of a rotation matrix.

    Raises AngleNearPi when the angle is within 1e-6 of pi, where the
    axis is not recoverable from the antisymmetric part.
    """
    R = np.asarray(R, dtype=float)
    cos_angle = np.clip(0.5 * (np.trace(R) - 1.0), -1.0, 1.0)
    angle = float(np.arccos(cos_angle))
    if angle >= np.pi - 1e-6:
        raise AngleNearPi(f"rotation angle {angle:.9f} too close to pi")
    if angle < SMALL_ANGLE:
        return np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]]) * 0.5
    scale = angle / (2.0 * np.sin(angle))
    return scale * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])


def left_jacobian(w: np.ndarray) -> np.ndarray:
    """V(w) mapping the translation part of a twist into a translation."""
    w = np.asarray(w, dtype=float)
    angle = float(np.linalg.norm(w))
    W = skew(w)
    if angle < SMALL_ANGLE:
        return np.eye(3) + 0.5 * W + (W @ W) / 6.0
    a2 = angle * angle
    A = (1.0 - np.cos(angle)) / a2
    B = (angle - np.sin(angle)) / (a2 * angle)
    return np.eye(3) + A * W + B * (W @ W)


def left_jacobian_inv(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    angle = float(np.linalg.norm(w))
    W = skew(w)
    if angle < SMALL_ANGLE:
        return np.eye(3) - 0.5 * W + (W @ W) / 12.0
    a2 = angle * angle
    A = np.sin(angle) / angle
    B = (1.0 - np.cos(angle)) / a2
    coeff = (1.0 - A / (2.0 * B)) / a2
    return np.eye(3) - 0.5 * W + coeff * (W @ W)


def exp_se3(xi: np.ndarray) -> Pose:
    """Exponential map from a twist to a rigid transform."""
    xi = np.asarray(xi, dtype=float).reshape(6)
    if not np.all(np.isfinite(xi)):
        raise ValueError("twist entries must be finite")
    u, w = xi[:3], xi[3:]
    return Pose(so3_exp(w), left_jacobian(w) @ u)


def log_se3(T: Pose) -> np.ndarray:
    """Logarithm map; inverse of exp_se3 for rotation angles below pi."""
    w = so3_log(T.R)
    u = left_jacobian_inv(w) @ T.t
    return np.hstack([u, w])


def adjoint(T: Pose) -> np.ndarray:
    """6x6 adjoint for the (translation, rotation) twist order.

    Satisfies log_se3(T * exp_se3(xi) * T^-1) == adjoint(T) @ xi and
    transports covariances between frames by congruence.
    """
    Ad = np.zeros((6, 6))
    Ad[:3, :3] = T.R
    Ad[:3, 3:] = skew(T.t) @ T.R
    Ad[3:, 3:] = T.R
    return Ad


def sample_twist(cov: np.ndarray, seed) -> np.ndarray:
    """Zero-mean Gaussian twist with the given covariance.

    Drawn as L @ z with L the Cholesky factor of (cov + 1e-12 I) and z a
    standard-normal 6-vector; deterministic for a given seed or
    Generator.
    """
    cov = np.asarray(cov, dtype=float).reshape(6, 6)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    try:
        L = np.linalg.cholesky(cov + 1e-12 * np.eye(6))
    except np.linalg.LinAlgError as e:
        raise NotPSD("perturbation covariance is not positive semi-definite") from e
    return L @ rng.standard_normal(6)


def check_cov6(M: np.ndarray, name: str = "covariance") -> np.ndarray:
    """Validate symmetry (1e-9) and PSD-ness (eigenvalues >= -1e-12)."""
    M = np.asarray(M, dtype=float).reshape(6, 6)
    if not np.all(np.isfinite(M)):
        raise NotPSD(f"{name} has non-finite entries")
    if np.max(np.abs(M - M.T)) > 1e-9:
        raise NotPSD(f"{name} is not symmetric")
    if np.min(np.linalg.eigvalsh(0.5 * (M + M.T))) < -1e-12:
        raise NotPSD(f"{name} has a negative eigenvalue")
    return M


_TRIL_R, _TRIL_C = np.tril_indices(6)


def cov_to_lower(M: np.ndarray) -> np.ndarray:
    """Row-major lower triangle (21 numbers), the on-disk covariance format."""
    M = np.asarray(M, dtype=float).reshape(6, 6)
    return M[_TRIL_R, _TRIL_C].copy()


def cov_from_lower(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(21)
    M = np.zeros((6, 6))
    M[_TRIL_R, _TRIL_C] = v
    M = M + np.tril(M, -1).T
    return M
