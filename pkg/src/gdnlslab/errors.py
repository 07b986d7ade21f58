"""Exception hierarchy shared by every module of the lab."""


class LabError(Exception):
    """Base class for all errors raised by gdnlslab."""


class InvalidDataError(LabError, ValueError):
    """Samples contain NaN/Inf or have the wrong shape."""


class DomainError(LabError, ValueError):
    """A parameter lies outside the range where the operation is defined."""


class ResolutionError(LabError, ValueError):
    """A resampling would alias or otherwise lose resolution."""


class GridTooNarrowError(LabError, ValueError):
    """The box does not contain the profile to the required tolerance."""


class RangeError(LabError, ValueError):
    """A wave packet support leaves the interior of the box."""


class TruncationError(LabError):
    """Too much mass sits in the edge zone for x-multiplication to be meaningful."""


class InsufficientDataError(LabError, ValueError):
    """Not enough snapshots / samples to perform a fit or a difference."""


class ConsistencyError(LabError, ValueError):
    """Two inputs that must describe the same instant or grid do not."""


class CoverageError(LabError, ValueError):
    """The velocity range of a profile does not cover the solution's support."""


class UnsupportedRegimeError(LabError, ValueError):
    """Asymptotic formulas requested for sigma < 1."""


class BlowUpError(LabError, FloatingPointError):
    """A time step produced non-finite data."""

    def __init__(self, time, message="non-finite data"):
        super().__init__(f"{message} at t={time!r}")
        self.time = time


class ConfigError(LabError, ValueError):
    """Invalid experiment configuration; ``key`` is a dotted key path."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class SnapshotFormatError(LabError, ValueError):
    """Bad magic, version or header in a snapshot file."""


class SnapshotTruncatedError(SnapshotFormatError):
    """Snapshot payload shorter than the header announces."""
