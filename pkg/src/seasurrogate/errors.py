"""Exception hierarchy shared by every stage of the pipeline.

The CLI maps these onto process exit codes, so each class carries one.
"""


class SeaSurrogateError(Exception):
    exit_code = 1


class ConfigError(SeaSurrogateError, ValueError):
    """Invalid parameters or configuration."""

    exit_code = 2


class DomainError(ConfigError):
    """Argument outside the mathematical domain of an operation."""


class ShapeError(ConfigError):
    """Array dimensions do not match."""


class ArtifactIOError(SeaSurrogateError, OSError):
    exit_code = 3


class MissingArtifactError(SeaSurrogateError, FileNotFoundError):
    """An upstream artifact (dataset, checkpoint, ...) does not exist."""

    exit_code = 4

    def __init__(self, path):
        super().__init__(f"missing upstream artifact: {path}")
        self.path = path


class NumericalError(SeaSurrogateError, ArithmeticError):
    exit_code = 5

    def __init__(self, message, step=None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class DivergenceError(NumericalError):
    """State or loss became non-finite."""


class TrainingError(NumericalError):
    pass
