"""Exception hierarchy for the Wasserstein BDF solver."""


class FlowError(Exception):
    """Base class for all solver errors."""


class ConfigError(FlowError, ValueError):
    """Invalid run or study configuration."""


class NonPositiveDensityError(FlowError, ValueError):
    """Initial density sample is not strictly positive."""


class AsymmetricDatumError(FlowError, ValueError):
    """Initial datum violates point symmetry u(x) = u(1 - x)."""


class NonUniformMeshError(FlowError, ValueError):
    """Initial samples are not given on the uniform grid x_j = j/N."""


class NonPositiveGError(FlowError, ValueError):
    """Lagrangian density g is not strictly positive."""


class LabelOutOfRangeError(FlowError, ValueError):
    """Particle label lies outside the open mass interval."""


class IndexOutOfRangeError(FlowError, ValueError):
    """Basis index outside 1..2N."""


class DimensionMismatchError(FlowError, ValueError):
    """Vector or matrix dimensions disagree."""


class UnsupportedOrderError(FlowError, ValueError):
    """BDF order without a coefficient table."""


class HistoryLengthMismatchError(FlowError, ValueError):
    """History length does not match the scheme order."""


class EmptyWindowError(FlowError, ValueError):
    """Fit window holds too few samples."""


class NonPositiveValuesError(FlowError, ValueError):
    """Series value inside a log fit is not strictly positive."""


class OutOfValidityRangeError(FlowError, ValueError):
    """Exponent outside the range covered by the decay-rate formula."""


class MassMismatchError(FlowError, ValueError):
    """Two densities compared by transport carry different mass."""


class StudyError(FlowError, ValueError):
    """Convergence or decay study cannot be evaluated."""


class SolverError(FlowError, RuntimeError):
    """Base class for failures inside a time step."""


class SingularKktError(SolverError):
    """The KKT matrix could not be factorized."""


class NoConvergenceError(SolverError):
    """Newton iteration exhausted its iteration budget."""


class PositivityLossError(SolverError):
    """Accepted iterate has a non-positive density."""
