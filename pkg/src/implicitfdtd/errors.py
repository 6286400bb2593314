"""Shared exception types."""


class CapabilityError(RuntimeError):
    """Requested operation is outside the declared capabilities."""


class SingularMatrixError(ArithmeticError):
    """A zero pivot was met while factorizing a line system."""
