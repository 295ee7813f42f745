"""Exception types shared across the toolkit.

Every error carries a stable ``code`` string so the HTTP service can map it
to a ``{error, message}`` payload without string-matching exception text.
"""

from __future__ import annotations


class LowshotError(Exception):
    """Base class for all toolkit errors."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__doc__ or self.code)


class DegenerateMetricError(LowshotError):
    """F-score denominator is zero (no predicted and no true positives)."""

    code = "DegenerateMetric"


class EmptyInputError(LowshotError):
    """An operation that needs at least one data point got none."""

    code = "EmptyInput"


class DegenerateFitError(LowshotError):
    """A calibration fit received targets that admit no sloped solution."""

    code = "DegenerateFit"


class AllZeroMassError(LowshotError):
    """Every unnormalized sampling mass is zero; widen the domain or go uniform."""

    code = "AllZeroMass"


class ZeroWeightMassError(LowshotError):
    """No draw carries positive weight, so no estimate can be formed yet."""

    code = "ZeroWeightMass"


class MissingLabelError(LowshotError):
    """A drawn item has no label available."""

    code = "MissingLabel"


class InsufficientDrawsError(LowshotError):
    """Variance estimation needs at least two draws."""

    code = "InsufficientDraws"


class DegenerateWeightsError(LowshotError):
    """One draw dominates the weight mass (C <= 0); variance unavailable."""

    code = "DegenerateWeights"


class IdMismatchError(LowshotError):
    """Two pools that must share item ids do not."""

    code = "IdMismatch"


class RegenerationLimitError(LowshotError):
    """Synthetic pool generation failed to produce a usable pool after 100 reseeds."""

    code = "RegenerationLimit"


class ReportIoError(LowshotError):
    """A report file could not be written or read."""

    code = "IoError"


class ValidationError(LowshotError):
    """A pool payload or configuration failed validation."""

    code = "ValidationError"


class StorageError(LowshotError):
    """Session persistence failed."""

    code = "StorageError"


class SessionExistsError(LowshotError):
    """A session with this id already exists; imports never overwrite."""

    code = "SessionExists"


class NotFoundError(LowshotError):
    """No session with the requested id exists."""

    code = "NotFound"


class SessionCompleteError(LowshotError):
    """The session has spent its budget; there is no batch to serve."""

    code = "SessionComplete"


class UnknownItemError(LowshotError):
    """A submitted label refers to an item outside the pending batch."""

    code = "UnknownItem"


class AlreadyLabeledError(LowshotError):
    """A submitted label refers to an item that already has one."""

    code = "AlreadyLabeled"


class InvalidLabelError(LowshotError):
    """Labels must be exactly 0 or 1."""

    code = "InvalidLabel"


class NoEstimateYetError(LowshotError):
    """No iteration has completed, so there is nothing to report."""

    code = "NoEstimateYet"


class SchemaMismatchError(LowshotError):
    """An imported session file has an unsupported schema version."""

    code = "SchemaMismatch"
