"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class ConfigError(ValueError):
    """A configuration value is out of range or inconsistent."""


class DataFormatError(ValueError):
    """A data or lexicon file violates its documented format."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class CheckpointError(ValueError):
    """Base class for checkpoint container problems."""


class CheckpointFormatError(CheckpointError):
    """File is not a checkpoint container (bad magic or corrupt layout)."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint was written by an unsupported format version."""


class CheckpointTruncatedError(CheckpointError):
    """Checkpoint ends before the declared payload is complete."""


class ConfigMismatchError(CheckpointError):
    """Checkpoint contents do not match the configuration expected by the caller."""


class TrainingError(RuntimeError):
    """Training cannot proceed (bad fold composition, degenerate data, ...)."""


class InsufficientCorpusError(TrainingError):
    """Pre-training corpus yields fewer than two usable classes."""
