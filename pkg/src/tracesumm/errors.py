"""Exception hierarchy shared by every tracesumm module."""


class TraceSummError(Exception):
    """Base class for all errors raised by tracesumm."""


class SchemaError(TraceSummError, KeyError):
    """An attribute or column name is unknown or malformed."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class EmptyInputError(TraceSummError, ValueError):
    """The input contains no traces (or no rows)."""


class RowError(TraceSummError, ValueError):
    """A single input row could not be parsed."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class XESParseError(TraceSummError, ValueError):
    """Malformed XML in an XES log."""

    def __init__(self, message, offset):
        super().__init__(f"byte offset {offset}: {message}")
        self.offset = offset


class MappingDomainError(TraceSummError, ValueError):
    """A symbol code lies outside the domain of a mapping function."""

    def __init__(self, code, size):
        super().__init__(f"symbol code {code} outside mapping domain [0, {size})")
        self.code = code


class ParameterError(TraceSummError, ValueError):
    """A numeric parameter is out of its allowed range."""


class DegenerateInputError(TraceSummError, ValueError):
    """The input is structurally valid but carries no usable signal."""


class ConsistencyError(TraceSummError, ValueError):
    """A summary does not match the sequence it claims to summarize."""


class UnknownTraceError(TraceSummError, KeyError):
    """A trace id was not found in the corpus."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""
