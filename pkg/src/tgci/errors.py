"""Exception hierarchy shared by all tgci modules."""


class TgciError(Exception):
    """Base class for every error raised by this package."""


class TheoryError(TgciError):
    """Problem while parsing or manipulating a domain theory.

    Carries the 1-based source line when the problem is tied to one.
    """

    def __init__(self, message: str, line: int | None = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DatasetError(TgciError):
    """Problem while loading, validating, or partitioning a dataset."""

    def __init__(self, message: str, line: int | None = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InterpreterError(TgciError):
    """Problem while redescribing examples against a theory."""


class LearnerError(TgciError):
    """Problem while training or applying a decision tree."""


class EvaluationError(TgciError):
    """Problem in the evaluation harness (curves, LOO, significance)."""


class PerturbationError(TgciError):
    """Problem while perturbing a dataset toward/away from a theory."""
