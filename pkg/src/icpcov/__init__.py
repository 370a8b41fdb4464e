"""Ground-truth ICP error covariances, a per-scan covariance regressor,
and covariance-weighted pose fusion."""

__version__ = "0.1.0"
