"""Exception taxonomy shared by all modules.

The CLI maps these onto machine-parseable error categories and exit codes;
library code raises them directly.
"""


class UNesTError(Exception):
    """Base class for all package errors."""

    category = "internal"


class DimensionError(UNesTError):
    """Shape or axis mismatch between operands."""

    category = "dimension"


class NumericError(UNesTError):
    """Non-finite or otherwise invalid numeric input."""

    category = "numeric"


class ConfigError(UNesTError):
    """Inconsistent or infeasible configuration."""

    category = "config"


class UsageError(UNesTError):
    """API misuse (e.g. backward on a non-scalar)."""

    category = "usage"


class FormatError(UNesTError):
    """Malformed on-disk artifact (volume file, checkpoint)."""

    category = "format"


class DataError(UNesTError):
    """Invalid dataset content (e.g. out-of-range labels)."""

    category = "data"


class GenerationError(UNesTError):
    """Phantom geometry infeasible after bounded retries."""

    category = "generation"


class TrainingError(UNesTError):
    """Training aborted (empty dataset, non-finite loss)."""

    category = "training"
