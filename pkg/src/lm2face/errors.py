"""Exception types shared across the package."""


class Lm2FaceError(Exception):
    """Base class for package errors."""


class ValidationError(Lm2FaceError):
    """Input data violates a structural contract (shape, range, count)."""


class BuildError(Lm2FaceError):
    """A network configuration cannot be assembled consistently."""


class CheckpointError(Lm2FaceError):
    """A checkpoint is missing, corrupt, or belongs to a different spec."""


class TrainingError(Lm2FaceError):
    """Training aborted; carries a reference to the last good checkpoint."""

    def __init__(self, message, last_checkpoint=None):
        super().__init__(message)
        self.last_checkpoint = last_checkpoint


class DegenerateInputError(Lm2FaceError):
    """Input is structurally valid but numerically unusable (e.g. zero inter-ocular distance)."""
