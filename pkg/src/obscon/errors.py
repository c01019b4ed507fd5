"""Exception hierarchy shared by the obscon modules."""


class ObsconError(Exception):
    """Base class for all obscon errors."""


class ConfigurationError(ObsconError, ValueError):
    """Invalid or inconsistent user-supplied configuration."""


class NumericalFailure(ObsconError, ArithmeticError):
    """A numerical routine failed to converge or hit a non-finite value."""


class DomainError(ConfigurationError):
    """Argument outside the mathematical domain of a function."""


class UnsupportedOrderError(ConfigurationError):
    pass


class InvalidIndexError(ConfigurationError):
    pass


class CapacityError(ConfigurationError):
    """Request exceeds the range covered by the Bessel zero table."""


class DegenerateSpectrumError(ObsconError):
    """Simple-spectrum formula applied to a degenerate eigenvalue cluster.

    ``cluster`` holds the labels of the modes sharing the eigenvalue.
    """

    def __init__(self, message, cluster=()):
        super().__init__(message)
        self.cluster = tuple(cluster)


class UnsupportedDegeneracyError(ObsconError):
    pass
