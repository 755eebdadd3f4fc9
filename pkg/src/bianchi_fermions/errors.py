"""Exception hierarchy shared by the library and the CLI."""


class BianchiError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BianchiError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class EvaluationError(BianchiError, ArithmeticError):
    """A computation produced a non-finite value."""


class StiffnessError(BianchiError, RuntimeError):
    """The adaptive integrator drove its step size below the underflow limit."""


class DivergenceError(BianchiError, ArithmeticError):
    """The integrated state became non-finite."""


class InputError(BianchiError, ValueError):
    """Inconsistent or incomplete input data (e.g. missing mode states)."""


class ConfigError(BianchiError, ValueError):
    """A configuration document could not be parsed or validated.

    Parameters
    ----------
    message : str
        Human readable description.
    key : str, optional
        Offending ``section.key``.
    line : int, optional
        1-based line number in the configuration text.
    """

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
