"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from iirnn.training.checkpoint import Checkpoint


class IIRNNError(Exception):
    exit_code: int = 1


class UsageError(IIRNNError):
    """Bad invocation or API misuse."""

    exit_code = 1


class ConfigError(UsageError):
    pass


class DimensionError(UsageError):
    """Array shapes that do not fit together."""

    def __init__(self, message: str, names: tuple[str, ...] = ()) -> None:
        super().__init__(message)
        self.names = names


class IngestionError(IIRNNError):
    exit_code = 2


class FormatError(IIRNNError):
    exit_code = 2


class CheckpointError(FormatError):
    pass


class InferenceError(IIRNNError):
    exit_code = 2


class TrainingError(IIRNNError):
    """Non-finite values during training.

    ``checkpoint`` holds the last good state when the trainer had one.
    """

    exit_code = 3

    def __init__(
        self,
        message: str,
        parameter: str | None = None,
        checkpoint: Checkpoint | None = None,
    ) -> None:
        super().__init__(message)
        self.parameter = parameter
        self.checkpoint = checkpoint
