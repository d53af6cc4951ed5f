"""Exception hierarchy shared by all qlnc modules."""

from __future__ import annotations


class QlncError(Exception):
    """Base class for every error raised by qlnc."""


class DivisionByZero(QlncError, ZeroDivisionError):
    pass


class LevelMismatch(QlncError, ValueError):
    pass


class LengthNotDivisible(QlncError, ValueError):
    pass


class FieldTooLarge(QlncError, ValueError):
    pass


class DimensionMismatch(QlncError, ValueError):
    pass


class Singular(QlncError, ValueError):
    """Matrix inversion failed; ``rank`` holds the rank that was found."""

    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


class DecodingFailure(QlncError):
    """The projected linear system of the decoder has no admissible solution."""


class Inconsistent(DecodingFailure):
    pass


class CannotComplete(DecodingFailure):
    pass


class SingularNode(QlncError, ValueError):
    pass


class IndexOutOfRange(QlncError, IndexError):
    pass


class InvalidBlocks(QlncError, ValueError):
    pass


class ConfigInvalid(QlncError, ValueError):
    pass


class InfeasibleConfig(ConfigInvalid):
    """Rate condition a + a' < m is violated."""


class DimensionInvalid(QlncError, ValueError):
    pass


class NTooSmall(QlncError, ValueError):
    pass


class Infeasible(QlncError, ValueError):
    pass


class CapExceeded(QlncError, ValueError):
    pass


class ParseError(QlncError, ValueError):
    pass
