"""Exception types shared across the toolkit."""


class FdrcastError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(FdrcastError, ValueError):
    """Array shapes do not conform; the message names both shapes."""


class ParseError(FdrcastError, ValueError):
    """A trace file contained an invalid symbol.

    `offset` is the byte offset of the offending symbol.
    """

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class InsufficientDataError(FdrcastError, ValueError):
    """A series is too short for the requested windowing or split."""


class CheckpointError(FdrcastError, ValueError):
    """A model file is malformed; the message names the file and the defect."""


class NumericError(FdrcastError, ArithmeticError):
    """A non-finite value appeared where finite arithmetic is required."""


class DivergenceError(NumericError):
    """Training produced a non-finite loss; carries epoch/batch context."""

    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class InsufficientEpochsError(FdrcastError, ValueError):
    """A validation-loss trace is too short for the stable average."""


class SearchError(FdrcastError, RuntimeError):
    """Hyperparameter search could not produce a comparable trial."""
