"""Exception types shared across the library."""


class BalmError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(BalmError):
    """Operands have incompatible shapes."""


class NotPositiveDefinite(BalmError):
    """A matrix required to be positive definite failed its pivot test."""


class NoConvergence(BalmError):
    """An iterative routine hit its iteration cap before its tolerance."""


class InnerNoConvergence(NoConvergence):
    """An inner subproblem solver hit its iteration cap."""


class UnsupportedObjective(BalmError):
    """No closed-form proximity rule is available for this objective."""


class UnsupportedCombination(BalmError):
    """This objective/set pairing has no supported subproblem rule."""


class ConfigInvalid(BalmError):
    """A solver configuration violates its validity conditions."""


class InsufficientHistory(BalmError):
    """A run history is too short for the requested computation."""


class MissingReference(BalmError):
    """A reference solution is required but was not supplied."""


class InvalidDims(BalmError):
    """Requested instance dimensions are not realizable."""


class SchemaError(BalmError):
    """A problem or history file does not match the expected layout."""
