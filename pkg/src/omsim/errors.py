"""Exception hierarchy shared by all omsim modules.

Parameter problems derive from :class:`ParameterError` (a ``ValueError``);
numerical breakdowns derive from :class:`NumericalError`.  The CLI maps the
two families onto distinct exit codes.
"""


class OmsimError(Exception):
    """Base class for every error raised by omsim."""


class ParameterError(OmsimError, ValueError):
    """Invalid physical parameter or configuration."""

    def __init__(self, name, message=None):
        self.name = name
        super().__init__(message or name)


class NonPositiveParameter(ParameterError):
    def __init__(self, name):
        super().__init__(name, f"parameter {name!r} must be > 0")


class NegativeParameter(ParameterError):
    def __init__(self, name):
        super().__init__(name, f"parameter {name!r} must be >= 0")


class UnknownFigure(OmsimError, KeyError):
    def __init__(self, figure_id):
        self.figure_id = figure_id
        super().__init__(f"unknown figure id {figure_id!r}")

    def __str__(self):
        return self.args[0]


class NumericalError(OmsimError, ArithmeticError):
    """A numerical routine could not produce a trustworthy answer."""


class NoConvergence(NumericalError):
    def __init__(self, iterations, last_residual):
        self.iterations = iterations
        self.last_residual = last_residual
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(last residual {last_residual:.3e})"
        )


class DegenerateDenominator(NumericalError):
    pass


class SingularSystem(NumericalError):
    def __init__(self, message, condition=None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (condition number {condition:.3e})"
        super().__init__(message)


class PoleEncountered(NumericalError):
    def __init__(self, name, value=None):
        self.name = name
        self.value = value
        msg = f"pole encountered: {name} vanishes"
        if value is not None:
            msg += f" (value {value:.3e})"
        super().__init__(msg)


class NumericalFailure(NumericalError):
    pass


class OutputError(OmsimError, OSError):
    """Reading or writing a file failed; ``path`` names the file."""

    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"{self.path}: {reason}")

    def __str__(self):
        return self.args[0]
