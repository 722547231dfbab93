"""Exception hierarchy shared by every module."""

from typing import List, Optional


class DVSError(Exception):
    """Base class for all dvs-forecast errors."""


class ParseError(DVSError, ValueError):
    """A series file row could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OrderError(DVSError, ValueError):
    """Times are not strictly increasing."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TooShortError(DVSError, ValueError):
    """A series or window set has fewer points than the operation needs."""


class DegenerateSplitError(DVSError, ValueError):
    """A train/test split would leave one side empty."""


class LengthError(DVSError, ValueError):
    """A sequence is shorter than the visibility transform allows."""


class NonFiniteError(DVSError, ValueError):
    """A NaN or infinity reached a computation that forbids it."""


class DimensionMismatchError(DVSError, ValueError):
    """Matrix and value dimensions disagree."""


class ShapeError(DVSError, ValueError):
    """Layer shapes do not compose or an input has the wrong length."""


class TapeMismatchError(DVSError):
    """A forward tape does not belong to the stack, or was already consumed."""


class KTooLargeError(DVSError, ValueError):
    """Moving-average order exceeds the window length."""


class SingularSystemError(DVSError):
    """Least-squares normal equations could not be solved."""


class DegenerateWalkError(DVSError):
    """Random-walk similarity carries no mass on the selected nodes."""


class LengthMismatchError(DVSError, ValueError):
    """Prediction and actual sequences differ in length or are empty."""


class UnknownMethodError(DVSError, ValueError):
    """A comparison method name is not recognised."""


class ConfigError(DVSError, ValueError):
    """One or more configuration problems, reported together."""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration: " + "; ".join(self.problems))


class ModelFormatError(DVSError, ValueError):
    """A saved model file is not valid JSON or lacks required fields."""


class ManifestError(DVSError):
    """A recorded run directory is missing or unreadable."""
