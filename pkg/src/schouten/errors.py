"""Shared exception types."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConeExitError(DomainError):
    """Eigenvalues left the admissible cone at some grid node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class BrokenConeError(RuntimeError):
    """A cone failed a structural sanity check (non-monotone ray membership)."""


class ContinuationError(RuntimeError):
    """Continuation step size underflowed; carries the last accepted state."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state
