"""Exception types raised by netgain."""

import numpy as np


class NetgainError(Exception):
    """Base class for all netgain errors."""


class DimensionError(NetgainError, ValueError):
    pass


class InvalidValueError(NetgainError, ValueError):
    """Non-finite entries, asymmetric input, violated type invariants."""


class SingularMatrixError(NetgainError, np.linalg.LinAlgError):
    pass


class NoSolutionError(NetgainError, np.linalg.LinAlgError):
    """Raised when a discrete Lyapunov equation has no unique solution."""


class UnitEigenvalueError(NetgainError, np.linalg.LinAlgError):
    pass


class DegenerateInputError(NetgainError, ValueError):
    pass


class UnsupportedSizeError(NetgainError, ValueError):
    pass


class NotWellPosedError(NetgainError):
    """The static loop matrix ``I - J A`` of a network is singular."""


class UnstableSubsystemError(NetgainError):
    pass


class ConfigurationError(NetgainError):
    pass


class ConvergenceError(NetgainError):
    pass


class FormatError(NetgainError, ValueError):
    """Malformed input file. ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class PreconditionError(NetgainError, ValueError):
    pass
