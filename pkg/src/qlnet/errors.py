"""Exception types shared across the package."""


class QlnetError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(QlnetError):
    """Matrix operands have incompatible or invalid shapes."""


class SolvabilityError(QlnetError):
    """A linear matrix equation has no reliable solution (spectrum clash).

    Carries the smallest singular value of the vectorized system so the
    caller can see how close to singular the problem was.
    """

    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class AliasingError(QlnetError):
    """Too few sample points to resolve the requested Laurent orders."""

    def __init__(self, message, minimal_points=None):
        super().__init__(message)
        self.minimal_points = minimal_points


class StabilityError(QlnetError):
    """A mode matrix is not Hurwitz where the operation requires it."""

    def __init__(self, message, worst_point=None):
        super().__init__(message)
        self.worst_point = worst_point


class ConfigurationError(QlnetError):
    """Input data is structurally valid but missing required pieces."""


class UnsupportedError(QlnetError):
    """Valid input falls outside the supported problem class."""


class ResourceLimitError(QlnetError):
    """A dense computation exceeds its size cap."""


class IntegrationError(QlnetError):
    """Time integration failed before reaching the requested horizon."""

    def __init__(self, message, last_good_time=None):
        super().__init__(message)
        self.last_good_time = last_good_time


class InconclusiveError(QlnetError):
    """Adaptive refinement hit its cap without meeting the tolerance.

    Carries the last two refinement values so the caller can judge how
    far apart they were.
    """

    def __init__(self, message, last_values=None):
        super().__init__(message)
        self.last_values = tuple(last_values or ())


class ModelFormatError(QlnetError):
    """A model document failed to parse or validate.

    ``violations`` lists every problem found, not just the first.
    """

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])
