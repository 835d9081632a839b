"""Exception types raised across the package."""


class PencilError(ValueError):
    """Base class for all errors raised by this package."""


class InputError(PencilError):
    """Malformed input: wrong shape, non-symmetric matrix, bad parameter."""


class PreconditionError(PencilError):
    """An operation was called outside the regime where it is defined."""


class ConditionViolation(PencilError):
    """A structural hypothesis on the forms (coercivity, trivial kernel
    intersection, ...) does not hold for the given matrices."""


class NotApplicable(PencilError):
    """The operation has no meaning for this kind of pencil."""


class PostconditionError(RuntimeError):
    """An internal consistency check failed; indicates a numerical
    breakdown rather than bad input."""
