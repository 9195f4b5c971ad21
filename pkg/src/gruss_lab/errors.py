"""Exception types separating contract violations from numerical failures."""


class GrussLabError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(GrussLabError):
    """Operands have incompatible shapes."""


class ContractError(GrussLabError):
    """A documented precondition of an operation was violated."""


class NumericError(GrussLabError):
    """A numerical kernel failed to converge or exceeded its budget."""


class NotCompletelyPositiveError(ContractError):
    """A Kraus form was requested for a map whose Choi matrix is not PSD."""


class UnitalizationError(ContractError):
    """The map sends the identity to a singular or non-Hermitian operator."""
