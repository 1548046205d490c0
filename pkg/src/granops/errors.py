"""Exception hierarchy shared by all granops modules."""


class GranopsError(Exception):
    """Base class for every error raised by granops."""


class InvalidDimensionError(GranopsError, ValueError):
    pass


class MissingBufferError(GranopsError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"no buffer named {self.name!r} in store"


class ShapeError(GranopsError, ValueError):
    pass


class DomainError(GranopsError, ValueError):
    """Input values outside the domain an operation accepts (e.g. non-binary mask)."""


class InvalidRangeError(GranopsError, ValueError):
    pass


class EmptyInputError(GranopsError, ValueError):
    pass


class InsufficientDataError(GranopsError, ValueError):
    pass


class UndefinedCorrelationError(GranopsError, ValueError):
    pass


class PairingError(GranopsError, ValueError):
    pass


class DegenerateError(GranopsError, ZeroDivisionError):
    pass


class FormatError(GranopsError, ValueError):
    """Malformed or truncated file content."""

    def __init__(self, message, offset=None, path=None):
        self.offset = offset
        self.path = path
        parts = []
        if path is not None:
            parts.append(str(path))
        if offset is not None:
            parts.append(f"byte {offset}")
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ScriptError(GranopsError):
    """Error tied to a position in macro source text."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class ScriptSyntaxError(ScriptError):
    pass


class UnknownOpError(ScriptError):
    pass


class ArityError(ScriptError):
    pass


class ScriptRuntimeError(ScriptError):
    pass
