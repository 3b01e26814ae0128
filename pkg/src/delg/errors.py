"""Exception hierarchy shared by every delg module."""


class DelgError(Exception):
    """Base class for all errors raised by delg."""


class FormulaSyntaxError(DelgError):
    def __init__(self, message, line=1, column=1, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class UnknownAgentError(FormulaSyntaxError):
    pass


class ModelError(DelgError):
    """Structurally invalid epistemic or action model."""


class ExecutabilityError(DelgError):
    """An action was applied where its precondition does not hold."""


class PreconditionError(DelgError):
    """A solver was called on an instance outside its supported class."""


class HypothesisError(PreconditionError):
    """An instance violates the turn discipline or one of H1-H3."""


class StrategyError(DelgError):
    """A strategy certificate is malformed or incomplete."""
