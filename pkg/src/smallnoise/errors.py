"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid configuration or argument value."""


class ShapeError(ValueError):
    """Input array has the wrong dimension."""


class DegenerateError(ArithmeticError):
    """A statistic cannot be formed (zero denominator, no co-jump mass).

    ``diagnostics`` carries whatever was computed before the failure.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
