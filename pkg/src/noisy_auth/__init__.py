"""Keyless message authentication from an advantage in channel noise."""

from .exceptions import DomainError, NoisyAuthError, ResourceLimitError, UsageError

__version__ = "0.1.0"

__all__ = ["DomainError", "NoisyAuthError", "ResourceLimitError", "UsageError", "__version__"]
