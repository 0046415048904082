"""Exception types shared across the package."""


class HatnetError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(HatnetError):
    """A model, problem, or run configuration is internally inconsistent."""


class UnsupportedOperationError(HatnetError):
    """An operation outside the supported differentiable primitive set."""


class TrainingDivergedError(HatnetError):
    """Loss became non-finite; carries the last finite state for inspection."""

    def __init__(self, message, epoch=None, trace=None):
        super().__init__(message)
        self.epoch = epoch
        self.trace = trace


class CheckpointError(HatnetError):
    """A checkpoint file is malformed; the message names the offending field."""
