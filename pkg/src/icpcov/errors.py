"""Exception hierarchy shared across the toolkit.

Two broad families matter for the CLI exit-code contract: ``DataError``
(bad or insufficient input, exit code 2) and ``NumericalError`` (a
computation failed or did not converge, exit code 3).
"""


class IcpCovError(Exception):
    """Base class for all toolkit errors."""


class DataError(IcpCovError):
    """Malformed, missing, or insufficient input data."""


class NumericalError(IcpCovError):
    """A numerical computation failed or is ill-posed."""


class AngleNearPi(NumericalError):
    """Rotation angle too close to pi; the logarithm axis is ambiguous."""


class NotPSD(NumericalError):
    """A matrix required to be positive (semi-)definite is not."""


class NumericalFailure(NumericalError):
    """Non-finite values or a failed linear solve."""


class TooFewCorrespondences(NumericalError):
    """ICP found fewer correspondences than the configured minimum."""


class InsufficientConvergence(NumericalError):
    """Too few Monte Carlo registrations converged to estimate a covariance."""


class TrainingDiverged(NumericalError):
    """Training loss became non-finite."""


class EmptyCloud(DataError):
    """Operation requires a non-empty point cloud."""


class TooFewPoints(DataError):
    """Cloud has fewer points than the neighborhood size requires."""


class EmptyInput(DataError):
    """Operation requires a non-empty input sequence."""


class NoMapScans(DataError):
    """No neighboring scans available to build a reference map."""


class MalformedFile(DataError):
    """File does not match the expected binary layout."""


class ParseError(DataError):
    """Text file failed to parse; message carries the line number."""


class LengthMismatch(DataError):
    """Paired sequences have different lengths."""


class BadTimestamps(DataError):
    """Timestamps are not strictly increasing."""
