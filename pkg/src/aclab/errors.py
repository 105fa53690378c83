"""Exception hierarchy shared by every module."""


class AclabError(Exception):
    """Base class for library errors."""


class ParseError(AclabError, ValueError):
    """Malformed text, CSV or JSON input.

    ``line`` and ``column`` are 1-based when known.
    """

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class InvalidArgument(AclabError, ValueError):
    pass


class InvalidCoefficient(InvalidArgument):
    pass


class EmptyGenerator(AclabError, ValueError):
    """gcd of an all-zero family requested."""


class AllZero(AclabError, ValueError):
    """Shortest progression requested for an all-zero tuple."""


class DegenerateMap(AclabError, ValueError):
    """Mobius map (az+b)/(cz+d) with ad == bc."""


class BudgetExceeded(AclabError, RuntimeError):
    """An exact computation would exceed its configured size cap."""

    def __init__(self, message, size=None, cap=None):
        if size is not None and cap is not None:
            message = f"{message} (size {size} > cap {cap})"
        super().__init__(message)
        self.size = size
        self.cap = cap


class ShatterFailure(AclabError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CertificateError(AclabError, AssertionError):
    """A structure certificate failed exact re-verification."""
