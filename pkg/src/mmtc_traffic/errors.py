"""Exception and warning types shared across the package."""


class InvalidParameterError(ValueError):
    """A distribution or scenario parameter violates its constraints."""


class DomainError(ValueError):
    """An operation was applied to an input it is not defined for."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class InsufficientDataError(RuntimeError):
    """A simulation run produced too few arrivals to compute statistics."""


class DegenerateSampleError(ValueError):
    """Sample statistics are undefined (e.g. zero mean gap)."""


class MissingInputError(FileNotFoundError):
    """Required input files are absent."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__("missing required input(s): " + ", ".join(map(str, self.missing)))


class ExcessMassWarning(UserWarning):
    """An excess CDF would exceed one because the supplied mean is too small."""
