"""Common error hierarchy.

Every operational failure raised by this package derives from SocError so
callers (CLI, API layer) can map them to exit codes / HTTP statuses in one
place. Module-specific errors live next to the code that raises them.
"""


class SocError(Exception):
    """Base class for all errors raised by soccore."""

    #: short machine-readable tag, defaults to the class name
    @property
    def tag(self) -> str:
        return type(self).__name__


class ConfigError(SocError):
    pass
