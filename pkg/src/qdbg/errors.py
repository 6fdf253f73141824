"""Exception hierarchy shared across the debugger."""


class QdbgError(Exception):
    """Base class for all debugger errors."""


class Location:
    """A (line, column) position in a source file, 1-based."""

    __slots__ = ("origin", "line", "column")

    def __init__(self, origin, line, column):
        self.origin = origin
        self.line = line
        self.column = column

    def __str__(self):
        return f"{self.origin}:{self.line}:{self.column}"

    def __repr__(self):
        return f"Location({self.origin!r}, {self.line}, {self.column})"

    def __eq__(self, other):
        return (isinstance(other, Location)
                and (self.origin, self.line, self.column)
                == (other.origin, other.line, other.column))


class SourceError(QdbgError):
    """An error tied to a source location, printable as file:line:col: message."""

    def __init__(self, location, message):
        self.location = location
        self.message = message
        super().__init__(f"{location}: {message}" if location else message)


class InvalidCharacter(SourceError):
    pass


class QasmSyntaxError(SourceError):
    pass


class SemanticError(SourceError):
    pass


class ExpansionError(SourceError):
    pass


class SizeError(QdbgError):
    pass


class TargetError(QdbgError):
    pass


class SubsetError(QdbgError):
    pass


class DegenerateState(QdbgError):
    pass


class ProvenanceUnavailable(QdbgError):
    pass


class ForcedOutcomeImpossible(QdbgError):
    pass


class DomainMismatch(QdbgError):
    pass


class CapacityError(QdbgError):
    pass


class SessionFinished(QdbgError):
    pass


class BreakpointIndexError(QdbgError):
    pass


class DecodeError(QdbgError):
    def __init__(self, line_number, message="malformed protocol line"):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")
