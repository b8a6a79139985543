"""Exception types shared across the toolkit."""


class KbpkitError(Exception):
    """Base class for all toolkit errors."""


class FormulaError(KbpkitError):
    """Malformed formula for the requested operation (e.g. primed variable
    outside an action theory, or an objective formula where a subjective
    one is required)."""


class ParseError(KbpkitError):
    """Syntax error in concrete input, annotated with a position."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, col {col}: {message}"
        super().__init__(message)


class ValidationError(KbpkitError):
    """A problem or action failed a load-time check (unsatisfiable init,
    empty successor set, non-exhaustive feedbacks, bad name, ...)."""


class LinkError(KbpkitError):
    """A program refers to an action name the problem does not declare."""


class BudgetError(KbpkitError):
    """A resource limit was exceeded.  Distinct from a proven
    nontermination or a definite no-plan answer."""


class NonTerminatingError(KbpkitError):
    """Raised by operations whose contract requires terminating inputs
    (e.g. trace-set comparison) when a plan provably loops."""

    def __init__(self, message, prefix=None):
        super().__init__(message)
        self.prefix = prefix


class ShapeError(KbpkitError):
    """Quantifier prefix does not match the shape a reduction requires."""
