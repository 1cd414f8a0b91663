"""Common exception base for the package.

Module-specific errors subclass :class:`MarblesimError` so the CLI can catch
everything the library raises on bad user input without masking genuine bugs.
"""


class MarblesimError(Exception):
    """Base class for all errors raised by marblesim."""
