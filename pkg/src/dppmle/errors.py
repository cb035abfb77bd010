"""Exception hierarchy shared by every module.

The CLI maps :class:`InputError` subclasses to exit code 2 and every other
:class:`DppError` to exit code 1.
"""


class DppError(Exception):
    """Base class for all library errors."""


class InputError(DppError):
    """Malformed files or text that could not be read."""


class ParseError(InputError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class StructuralInputError(DppError, ValueError):
    """Wrong shape, non-finite entries, indices out of range."""


class ValidationError(DppError, ValueError):
    """Well-formed input that violates a documented invariant."""


class SizeGuardError(DppError, ValueError):
    pass


class NotLEnsembleError(DppError, ValueError):
    def __init__(self, eigenvalue):
        self.eigenvalue = eigenvalue
        super().__init__(
            f"kernel has eigenvalue {eigenvalue!r} >= 1; no L-ensemble exists")


class DomainError(DppError, ValueError):
    pass


class DegenerateInstanceError(DppError, ValueError):
    pass


class CapacityError(DppError, ValueError):
    pass


class ParameterError(DppError, ValueError):
    pass


class ExpanderQualityError(DppError):
    pass


class ColoringError(DppError):
    pass


class DecodeError(DppError):
    pass


class AnchorDegeneracyError(DppError):
    pass


class GuaranteeError(DppError):
    """A guarantee-mode precondition or postcondition did not hold."""
