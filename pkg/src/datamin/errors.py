"""Exception hierarchy shared by every datamin module."""


class DataminError(Exception):
    pass


class DslError(DataminError):
    """A diagnostic about program text, carrying a 1-based source position."""

    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ParseError(DslError):
    pass


class TypeCheckError(DslError):
    pass


class EvalError(DataminError):
    pass


class DomainError(EvalError):
    """A valuation is missing an input or holds an out-of-domain value."""


class PreconditionViolated(EvalError):
    pass


class DivisionByZero(EvalError):
    pass


class LoopBoundExceeded(EvalError):
    pass


class LogicError(DataminError):
    pass


class UndeclaredVariable(LogicError):
    pass


class Unsatisfiable(LogicError):
    pass


class BudgetExceeded(DataminError):
    pass


class SymbolicExecutionError(DataminError):
    pass


class UnrollBoundExceeded(SymbolicExecutionError):
    def __init__(self, message, path_condition=None):
        super().__init__(message)
        self.path_condition = path_condition


class InternalConsistencyError(DataminError):
    """Raised when two routes that must agree do not; always a bug."""


class SynthesisError(DataminError):
    pass


class ClassCapExceeded(SynthesisError):
    pass


class SignatureMismatch(DataminError):
    pass
