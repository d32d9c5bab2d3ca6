class DomainError(ValueError):
    """Raised when an argument lies outside the domain an operation is defined on."""


class PhaseError(RuntimeError):
    """Raised when the settings stream is consulted before the ensemble is recorded."""
