"""Exception types shared across the package."""


class InputError(ValueError):
    """Bad user-supplied data or parameters."""


class ParseError(InputError):
    """A malformed line in an edge list, root list or solution file."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""
