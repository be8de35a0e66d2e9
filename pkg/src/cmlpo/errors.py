"""Exception hierarchy shared by every phase."""

from __future__ import annotations


class CmlError(Exception):
    """Base class; ``span`` is attached when the error has a source location."""

    def __init__(self, message, span=None):
        super().__init__(message)
        self.message = message
        self.span = span

    def render(self) -> str:
        if self.span is None:
            return f"error: {self.message}"
        return f"{self.span.file}:{self.span.start_line}:{self.span.start_col}: error: {self.message}"


class LexError(CmlError):
    pass


class ParseError(CmlError):
    def __init__(self, message, span=None, expected=()):
        super().__init__(message, span)
        self.expected = tuple(expected)


class UnsupportedFeature(ParseError):
    def __init__(self, construct, span=None):
        super().__init__(f"unsupported construct: {construct}", span)
        self.construct = construct


class TypeCheckError(CmlError):
    pass


class ModelErrors(CmlError):
    """A batch of type errors, all collected in source order."""

    def __init__(self, errors):
        super().__init__(f"{len(errors)} error(s)")
        self.errors = list(errors)

    def render(self) -> str:
        return "\n".join(e.render() for e in self.errors)


class EvalError(CmlError):
    pass


class PartialOpError(EvalError):
    pass


class UnboundName(EvalError):
    pass


class QuantifierOverInfiniteType(EvalError):
    pass


class NotEnumerable(EvalError):
    pass


class PreViolation(EvalError):
    pass


class SymbolicExecutionUnsupported(CmlError):
    pass


class UnsupportedForSmt(CmlError):
    pass


class SolverUnavailable(CmlError):
    pass


class SolverTimeout(CmlError):
    pass


class SessionError(CmlError):
    pass


class UnknownPOId(SessionError):
    pass
