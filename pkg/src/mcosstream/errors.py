"""Exception types raised across the package."""


class MCOSError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(MCOSError, ValueError):
    pass


class RangeError(MCOSError, IndexError):
    pass


class SequencingError(MCOSError):
    """Frames were fed to an engine out of order."""


class ConsistencyError(MCOSError, ValueError):
    """Input violates a relation invariant (duplicate row, id with two classes)."""


class ParseError(MCOSError, ValueError):
    def __init__(self, message: str, line: int | None = None, position: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"position {position}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.position = position


class QuerySemanticError(MCOSError, ValueError):
    pass


class ConfigurationError(MCOSError, ValueError):
    pass


class LogicError(MCOSError, RuntimeError):
    """An internal precondition was violated by the caller."""
