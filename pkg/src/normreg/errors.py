"""Exception types raised by normreg."""


class NormRegError(ValueError):
    """Base class for every error raised by this package."""


class DimensionError(NormRegError):
    """Shapes or index-set bounds do not match."""


class ContractError(NormRegError):
    """Input violates a structural precondition (triangularity, symmetry)."""


class ParameterError(NormRegError):
    """A scalar parameter is outside its admissible range."""


class CapacityError(NormRegError):
    """Input is too large for an exhaustive routine or format."""
