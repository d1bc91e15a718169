"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class WmbmcError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(WmbmcError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")


class DslSyntaxError(ParseError):
    pass


class UndeclaredIdentifier(ParseError):
    pass


class DuplicateDeclaration(ParseError):
    pass


class AmbiguousIdentifier(ParseError):
    """A final assertion names a local declared by more than one thread."""


class WidthOverflow(WmbmcError):
    pass


class CycleDetected(WmbmcError):
    pass


class ReadWithoutWriter(WmbmcError):
    pass


class EmptyAssertSet(WmbmcError):
    pass


class WidthMismatch(WmbmcError):
    pass


class EncodingBoundViolation(WmbmcError):
    pass


class MalformedCnf(WmbmcError):
    pass


class ModelRejected(WmbmcError):
    pass


class SolverBackendError(WmbmcError):
    pass


class NoSuchTransition(WmbmcError):
    pass


class StateSpaceBudgetExceeded(WmbmcError):
    pass


class InconsistentModel(WmbmcError):
    pass
