"""Exception hierarchy.

Every error raised on purpose by the package derives from
``NegativeSurveyError`` so callers (and the CLI) can tell validation
problems apart from numerical refusals.
"""


class NegativeSurveyError(ValueError):
    """Base class for all package errors."""


class ValidationError(NegativeSurveyError):
    """An input violates a documented invariant."""


class InvalidCategoryCountError(ValidationError):
    pass


class SchemeDegenerateError(ValidationError):
    """The two-option scheme needs at least three categories."""


class DesignValidationError(ValidationError):
    """A design matrix or tie-break table is malformed.

    ``position`` holds the offending (row, column) or column index, 0-based.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class DimensionMismatchError(ValidationError):
    pass


class DistributionError(ValidationError):
    """A vector that should be a probability distribution is not."""


class InsufficientSampleError(ValidationError):
    pass


class ImpossibleConditioningError(ValidationError):
    """Conditioning on the elimination of a category that is certainly true."""


class SingularDesignError(NegativeSurveyError):
    """The design matrix cannot be inverted reliably."""

    def __init__(self, message, rcond=None):
        super().__init__(message)
        self.rcond = rcond
