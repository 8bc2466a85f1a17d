"""Error taxonomy shared by every layer.

Each error subclasses the builtin it specializes so callers that only care
about ``ValueError`` keep working. The CLI maps them to exit codes.
"""

from typing import Optional


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class NumericError(ArithmeticError):
    """A computation received or produced non-finite values."""


class LabelError(ValueError):
    """A gold label is outside its allowed range."""


class ConfigError(ValueError):
    """A configuration field is invalid or inconsistent."""


class CheckpointError(ValueError):
    """A checkpoint file is corrupt or has an unsupported format version."""


class MissingGradientError(RuntimeError):
    """An optimizer step was requested for a parameter with no gradient."""


class DatasetError(ValueError):
    """A dataset file or in-memory dataset violates the schema.

    ``locus`` names where the problem is (``line 3``, an utterance id, ...).
    """

    def __init__(self, message: str, locus: Optional[str] = None):
        self.locus = locus
        if locus:
            message = f"{locus}: {message}"
        super().__init__(message)


class DatasetDimensionError(DatasetError):
    """Feature vectors disagree with the declared dimensions."""
