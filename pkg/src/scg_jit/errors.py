from __future__ import annotations


class ScgError(Exception):
    """Base class of all errors raised by scg-jit."""


class UsageError(ScgError):
    """Invalid invocation: unknown flags, missing seed, invalid choices."""


class DataError(ScgError, ValueError):
    """Input data violates a contract of a pipeline stage."""


class JoinError(DataError):
    pass


class SplitError(DataError):
    pass


class TrainingError(DataError):
    pass


class EmbeddingError(DataError):
    def __init__(self, message: str, iteration: int | None = None) -> None:
        super().__init__(message if iteration is None else f"{message} (iteration {iteration})")
        self.message = message
        self.iteration = iteration

    def __reduce__(self) -> tuple[type[EmbeddingError], tuple[str, int | None]]:
        return type(self), (self.message, self.iteration)


class CellError(DataError):
    """Failure inside one (classifier, combination) cell of an evaluation run."""

    def __init__(self, classifier: str, combination: str, cause: Exception) -> None:
        super().__init__(f"cell {classifier}/{combination} failed: {cause}")
        self.classifier = classifier
        self.combination = combination
        self.cause = cause

    # Cells may fail inside worker processes
    def __reduce__(self) -> tuple[type[CellError], tuple[str, str, Exception]]:
        return type(self), (self.classifier, self.combination, self.cause)
