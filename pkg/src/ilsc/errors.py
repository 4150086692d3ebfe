"""Exception hierarchy shared by the library and the command line."""


class ILSCError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ILSCError, ValueError):
    """Inputs violate a precondition (bad parameters, malformed data)."""


class FormatError(ValidationError):
    """A persisted file does not follow its expected format.

    ``location`` carries a human-readable pointer such as ``"row 4"`` or
    ``"column 'class'"`` so callers can report where parsing failed.
    """

    def __init__(self, message, path=None, location=None):
        self.path = path
        self.location = location
        parts = [str(p) for p in (path, location) if p is not None]
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class UnsupportedFormatError(FormatError):
    pass


class IndistinguishableClassesError(ValidationError):
    pass
