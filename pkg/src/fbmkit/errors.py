"""Exception taxonomy shared by the library and the CLI.

The CLI maps these onto exit codes: ValidationError -> 2, AccuracyError -> 3.
"""


class FbmkitError(Exception):
    """Base class for all package errors."""


class ValidationError(FbmkitError, ValueError):
    """Bad domain input: parameter out of range, malformed path, config conflict."""


class AccuracyError(FbmkitError, ArithmeticError):
    """A numerical routine cannot meet its error budget.

    Carries the offending estimate so callers can report it.
    """

    def __init__(self, message, estimate=None, budget=None):
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget
