from collections.abc import Sequence

__all__ = (
    "ApeError",
    "EmptyCorpus",
    "OverrunError",
    "ScriptParseError",
    "ShapeMismatch",
    "NumericalError",
    "NotScalar",
    "EmptyInput",
    "InvalidTarget",
    "VocabMismatch",
    "MissingSource",
    "WrongMode",
    "PoolExhausted",
    "LineCountMismatch",
    "CheckpointError",
    "TrainingAborted",
)


class ApeError(Exception):
    """Base class for data errors (bad corpora, scripts, checkpoints...)."""


class EmptyCorpus(ApeError):
    pass


class OverrunError(ApeError):
    """An edit script consumes more MT tokens than the sentence has."""

    def __init__(self, consumed: int, length: int):
        super().__init__(f"Script consumes {consumed} tokens but the MT sentence only has {length}")
        self.consumed = consumed
        self.length = length


class ScriptParseError(ApeError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ShapeMismatch(ApeError):
    pass


class NumericalError(ApeError):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


class NotScalar(ApeError):
    pass


class EmptyInput(ApeError):
    pass


class InvalidTarget(ApeError):
    pass


class VocabMismatch(ApeError):
    pass


class MissingSource(ApeError):
    pass


class WrongMode(ApeError):
    pass


class PoolExhausted(ApeError):
    pass


class LineCountMismatch(ApeError):
    def __init__(self, files: Sequence[str], counts: Sequence[int]):
        _desc = ", ".join(f"{f!r}: {c}" for f, c in zip(files, counts))
        super().__init__(f"Parallel files have different line counts ({_desc})")
        self.files = list(files)
        self.counts = list(counts)


class CheckpointError(ApeError):
    pass


class TrainingAborted(ApeError):
    def __init__(self, step: int, reason: str):
        super().__init__(f"Training aborted at step {step}: {reason}")
        self.step = step
