"""Exception and warning types shared across the package."""


class UndefinedStatisticError(ValueError):
    """A test statistic has a zero denominator (empty row/column, zero variance)."""


class DegenerateMomentsError(UndefinedStatisticError):
    """Null moments cannot be formed, e.g. no reflexive or no non-reflexive pairs."""


class SingularCovarianceError(UndefinedStatisticError):
    """The self-column covariance matrix is singular or badly conditioned."""


class DegenerateConfigurationWarning(UserWarning):
    """Coincident points, ties at distance zero or an unusually busy NN hub."""
