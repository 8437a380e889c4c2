"""Exception hierarchy shared by every module."""


class QiopError(Exception):
    """Base class for package errors."""


class DimensionError(QiopError, ValueError):
    """Operand sizes do not match."""


class InvalidInput(QiopError, ValueError):
    """An argument violates a documented precondition."""


class ResourceError(QiopError, RuntimeError):
    """A configured size or branch cap would be exceeded."""


class DecompositionError(QiopError, ValueError):
    """A matrix is not proportional to a Pauli operator."""


class UnsatisfiableError(QiopError, ValueError):
    """No satisfying wire assignment exists for the requested input."""


class NumericError(QiopError, ArithmeticError):
    """A numerical invariant drifted past its tolerance."""
