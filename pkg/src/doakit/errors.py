"""Exception hierarchy shared by all modules."""


class DoaError(Exception):
    """Base class for all doakit errors."""


class DomainError(DoaError, ValueError):
    """An argument lies outside the domain of the operation."""


class UsageError(DoaError, ValueError):
    """An operation was applied in an unsupported sequence."""


class ConfigError(DoaError, ValueError):
    """Invalid experiment configuration.

    Args:
        message: Human readable description.
        field: Dotted name of the offending field, if known.
        line: 1-based line number in the source document, if known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if field is not None:
            prefix.append(f"field '{field}'")
        full = f"{', '.join(prefix)}: {message}" if prefix else message
        super().__init__(full)


class EstimationError(DoaError, RuntimeError):
    """An estimator could not produce a valid result."""


class UnderresolvedError(EstimationError):
    """Fewer spectral peaks were found than requested.

    The peaks that were found are available as ``found`` (a
    :class:`~doakit.subspace.DoaEstimates`).
    """

    def __init__(self, message, found=None):
        super().__init__(message)
        self.found = found


class DegenerateGeometryError(EstimationError):
    """A matrix required by the estimator is numerically singular."""


class SingularityError(EstimationError):
    """Covariance is too ill-conditioned to invert; raise diagonal loading."""
