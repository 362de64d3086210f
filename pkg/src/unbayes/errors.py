"""Exception hierarchy.

Every domain failure derives from :class:`UnbayesError`; the CLI prints the
class name as the structured error code and exits with status 1.
"""


class UnbayesError(Exception):
    """Base class for all domain errors raised by the package."""

    @property
    def code(self):
        return type(self).__name__


class InvalidGrid(UnbayesError, ValueError):
    pass


class ZeroPriorWeight(InvalidGrid):
    pass


class InvalidSampleSpace(UnbayesError, ValueError):
    pass


class NonStochasticRow(UnbayesError, ValueError):
    pass


class ZeroMarginal(UnbayesError, ValueError):
    pass


class LengthMismatch(UnbayesError, ValueError):
    pass


class UnknownName(UnbayesError, ValueError):
    pass


class BadSpec(UnbayesError, ValueError):
    pass


class DegreeTooHigh(UnbayesError, ValueError):
    pass


class DegreeMismatch(UnbayesError, ValueError):
    pass


class NMaxTooLarge(UnbayesError, ValueError):
    pass


class IdentityViolation(UnbayesError, ArithmeticError):
    """A theoretical identity failed its numerical check.

    Raised only when an internal consistency check exceeds its tolerance,
    which signals either an ill-conditioned model or a bug.
    """


class NotEstimable(UnbayesError, ValueError):
    """The target function has no unbiased estimator.

    Attributes
    ----------
    projection : numpy.ndarray
        Nearest estimable function (weighted least-squares projection).
    residual_norm : float
        Prior-weighted norm of the part with zero Bayes estimate.
    """

    def __init__(self, projection, residual_norm, relative_residual):
        self.projection = projection
        self.residual_norm = float(residual_norm)
        self.relative_residual = float(relative_residual)
        super().__init__(
            f"target is not estimable: residual norm {self.residual_norm:.6g} "
            f"(relative {self.relative_residual:.3g})"
        )
