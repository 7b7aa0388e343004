"""Exception hierarchy shared by the library and the CLI exit-code contract."""


class SRNError(Exception):
    """Base class for all errors raised by srnreduce."""

    exit_code = 3


class ParseError(SRNError, ValueError):
    """Malformed network source text."""

    exit_code = 1

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ConfigError(SRNError, ValueError):
    """Bad command-line or run configuration."""

    exit_code = 1


class StructureError(SRNError, ValueError):
    """A structural precondition (non-interaction, properness, closure, ...) fails."""

    exit_code = 2

    def __init__(self, message, details=None):
        self.details = details or {}
        super().__init__(message)


class StateSpaceCapExceeded(StructureError):
    """Reachability exploration hit the configured state-count cap."""

    def __init__(self, message, frontier=None):
        super().__init__(message, {"frontier": frontier})
        self.frontier = frontier


class NumericalError(SRNError, RuntimeError):
    """A solver failed or a numerical certificate did not hold."""

    exit_code = 3
