"""Exception types shared across the toolkit."""


class CimtError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(CimtError):
    """A value or data object violates an operation's input contract."""


class InvalidConfigError(CimtError):
    """A configuration value is out of its allowed range."""


class ParseError(CimtError):
    """A text input could not be parsed; carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GeometryError(CimtError):
    """Contour geometry violates the far-wall (LI above MA) convention."""
