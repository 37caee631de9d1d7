"""Localization outage probability in randomly deployed anchor networks."""

from locoutage.errors import ConvergenceError, DomainError

__version__ = "0.1.0"

__all__ = ["ConvergenceError", "DomainError", "__version__"]
