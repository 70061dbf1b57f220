"""Exception hierarchy shared by all modules."""


class SparseUPAError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(SparseUPAError, ValueError):
    """Invalid system configuration or experiment parameters."""


class SingularityError(SparseUPAError, ValueError):
    """An observation point coincides with an antenna."""


class DomainError(SparseUPAError, ValueError):
    """Argument outside the domain where a closed form is defined."""


class FeasibilityError(SparseUPAError):
    """The main lobe does not concentrate along z for these parameters.

    ``min_spacing`` carries the antenna spacing (m) above which the
    request would become feasible.
    """

    def __init__(self, message, min_spacing=None):
        super().__init__(message)
        self.min_spacing = min_spacing


class SearchError(SparseUPAError, RuntimeError):
    """A bounded search terminated without a result."""


class DegenerateChannelError(SparseUPAError, ValueError):
    """Channel has no energy (all singular values are zero)."""


class InvalidInputError(SparseUPAError, ValueError):
    """Grid parameters violate the fitting-validity constraint."""


class FittingError(SparseUPAError, ValueError):
    """Least-squares design is rank deficient."""


class NumericError(SparseUPAError, ArithmeticError):
    """A numerical decomposition failed."""
