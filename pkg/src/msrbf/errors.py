"""Exception types shared across the solver."""


class OutOfDomainError(ValueError):
    """A point lies outside the box it was mapped against."""


class AssemblyError(RuntimeError):
    """A block of the least-squares system could not be assembled."""


class SolverError(RuntimeError):
    """A factorization failed or an iterative reference solve did not converge."""


class UndefinedMetricError(ValueError):
    """Relative errors are undefined because the reference norm vanishes."""
