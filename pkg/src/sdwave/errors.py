"""Exception hierarchy shared by all solver modules."""


class SdwError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(SdwError, ValueError):
    """Input failed validation before any solve was attempted."""


class SolverError(SdwError, RuntimeError):
    """A solver could not complete."""


# numerics
class StepSizeUnderflow(SolverError):
    pass


class NonFiniteRhs(SolverError):
    pass


class NoSignChange(SolverError, ValueError):
    pass


class MaxDepthExceeded(SolverError):
    pass


# model
class NegativeTime(ValidationError):
    pass


class UnknownModel(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


# riemann / fronts
class BracketFailure(SolverError):
    """The weight equation has no sign change; the flux is not increasing."""


class RegionViolation(SolverError):
    pass


class InvalidPartition(ValidationError):
    pass


class NonOvercompressiveMerge(SolverError):
    pass


class EventBudgetExceeded(SolverError):
    pass


class TimeOutOfRange(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


# gvp
class OutOfSupport(ValidationError):
    pass


class UnboundedBelow(SolverError):
    pass


class SupportEscape(ValidationError):
    pass


# cli
class IncompatibleScenario(ValidationError):
    pass
