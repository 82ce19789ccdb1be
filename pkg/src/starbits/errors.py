"""Exception types shared across the package."""


class StarbitsError(Exception):
    """Base class for errors raised by this package."""


class EntropyUnavailableError(StarbitsError):
    """The operating system entropy facility could not be used.

    Callers should fall back to an explicit ``--seed``.
    """


class ReseedRequiredError(StarbitsError):
    """The generator hit its reseed limit and refuses to produce more bits."""


class PointFormatError(StarbitsError):
    """A point-set file could not be parsed.

    Carries the 1-based line number of the offending row when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InfeasibleError(StarbitsError):
    """The requested instance exceeds a documented feasibility guard."""
