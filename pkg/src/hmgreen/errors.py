"""Exception types shared by all modules.

The CLI maps these onto exit codes, so keep the hierarchy flat.
"""


class HMGreenError(Exception):
    """Base class for every error raised by the package."""


class InputError(HMGreenError, ValueError):
    """Malformed or out-of-contract input."""


class UnsupportedError(HMGreenError):
    """The operation is not defined for this input class (e.g. even discriminants)."""


class DomainError(HMGreenError, ValueError):
    """Evaluation point outside the region where a formula is valid."""


class SingularityError(DomainError):
    """Evaluation point too close to a divisor."""


class DegenerateInputError(DomainError):
    """Weight vector on a wall, or a similar measure-zero degeneracy."""


class PrecisionError(HMGreenError, ArithmeticError):
    """A series, quadrature or extrapolation did not reach its tolerance."""


class SearchExhaustedError(HMGreenError, RuntimeError):
    """A bounded search did not find a solution; raise the bound."""
