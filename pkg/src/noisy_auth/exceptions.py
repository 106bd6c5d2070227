"""Exception types raised across the package."""


class NoisyAuthError(Exception):
    """Base class for all package errors."""


class DomainError(NoisyAuthError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(NoisyAuthError, ValueError):
    """An operation was invoked in a configuration that does not support it."""


class ResourceLimitError(NoisyAuthError, RuntimeError):
    """A computation would exceed a configured enumeration or memory cap."""
