"""Exception hierarchy shared across the package."""


class SecGdofError(Exception):
    """Base class for all package errors."""


class DomainError(SecGdofError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class UnsupportedRegimeError(SecGdofError):
    """No scheme is implemented for the requested (setting, alpha) pair."""


class EpsilonTooLargeError(DomainError):
    """The GDoF back-off drives one of the layer budgets negative."""


class SearchSpaceTooLargeError(SecGdofError):
    """An exhaustive search would exceed the configured point cap."""


class UncertifiableStepError(SecGdofError):
    """A successive-decoding step cannot be certified by interval arithmetic."""

    def __init__(self, message, *, step=None, bound=None, half_distance=None):
        super().__init__(message)
        self.step = step
        self.bound = bound
        self.half_distance = half_distance
