"""Exception hierarchy shared by every stage of the tool."""

from __future__ import annotations


class MivcError(Exception):
    """Base class for all errors raised by mivckit."""


class InputError(MivcError):
    """Problem with the user's model; reported with a source location."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


class ParseError(InputError):
    def __init__(self, message, line=None, column=None, expected=()):
        self.expected = frozenset(expected)
        if self.expected:
            message = f"{message} (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(message, line, column)


class ResolutionError(ParseError):
    """Unknown identifier, duplicate declaration or label, cyclic node calls."""


class TypeCheckError(InputError):
    pass


class ElaborationError(InputError):
    pass


class CalledNodeHasAssumptions(ElaborationError):
    pass


class NonImportedNodeWithoutBody(ElaborationError):
    pass


class NonLinearTerm(ElaborationError):
    pass


class SolverError(MivcError):
    pass


class SpawnError(SolverError):
    pass


class ProtocolError(SolverError):
    pass


class SolverCrashed(SolverError):
    pass


class EvaluationError(MivcError):
    pass


class NoCutSetExists(MivcError):
    pass


class MissingYVariable(MivcError):
    pass


class IncompleteEnumeration(MivcError):
    pass
