"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class NumericError(ArithmeticError):
    """A conversion hit a vanishing denominator or overflowed."""


class FitError(RuntimeError):
    """A least-squares fit failed or its input was degenerate."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ResolutionError(RuntimeError):
    """Branches of an avoided crossing could not be resolved on the grid."""


class ConfigurationError(ValueError):
    """A model configuration is inconsistent (e.g. Hilbert space too large)."""


class SingularityError(ZeroDivisionError):
    """A closed-form expression was evaluated at one of its poles."""

    def __init__(self, message, boundary):
        super().__init__(message)
        self.boundary = boundary


class ValidationError(ValueError):
    """A device description failed validation.

    ``problems`` lists every ``(field_path, message)`` pair found, not just the
    first one.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.problems)
        super().__init__(f"{len(self.problems)} validation problem(s): {lines}")
