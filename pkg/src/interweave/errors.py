"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class InterweaveError(Exception):
    """Base class for all errors raised by this package."""


class Overflow(InterweaveError, ArithmeticError):
    """A value left the signed 64-bit range."""


def check_int64(value: int) -> int:
    if value < INT64_MIN or value > INT64_MAX:
        raise Overflow(f"value {value} does not fit in a signed 64-bit integer")
    return value


class ExprSyntaxError(InterweaveError, ValueError):
    def __init__(self, message: str, position: int | None = None) -> None:
        self.position = position
        where = f" at column {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class ForbiddenVariable(InterweaveError, ValueError):
    pass


class MissingY(InterweaveError, ValueError):
    pass


class InvalidDelta(InterweaveError, ValueError):
    pass


class NegativeInput(InterweaveError, ValueError):
    pass


class SchemeFileError(InterweaveError, ValueError):
    pass


class RirSyntaxError(InterweaveError, ValueError):
    pass


class ArityMismatch(InterweaveError, ValueError):
    def __init__(self, message: str, term: object = None) -> None:
        self.term = term
        super().__init__(message)


class UnknownName(InterweaveError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class NonInvertibleEffect(InterweaveError):
    """Inversion was requested for a program that performs an emit."""


class ChannelTimeout(InterweaveError, TimeoutError):
    """A blocking channel operation waited longer than its timeout."""


class ChannelAborted(InterweaveError, RuntimeError):
    """The run was torn down while this party was waiting."""


class ChannelUsageError(InterweaveError, RuntimeError):
    """A third thread tried to act as one of the two channel parties."""
