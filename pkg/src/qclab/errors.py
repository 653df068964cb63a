"""Exception and warning types raised by qclab.

Errors that signal a failed numerical run (leakage, unresolved phase
advance, degenerate frames) derive from :class:`NumericalAbort` so the
CLI can map them to a dedicated exit status.
"""


class QCLabError(Exception):
    """Base class for all qclab errors."""


class GridMismatchError(QCLabError, ValueError):
    pass


class GridSpecError(QCLabError, ValueError):
    pass


class PacketTooNarrowError(QCLabError, ValueError):
    pass


class PacketNearBoundaryError(QCLabError, ValueError):
    pass


class KernelUnderResolvedError(QCLabError, ValueError):
    pass


class OutOfBoxError(QCLabError, ValueError):
    pass


class UnsupportedDerivativeError(QCLabError, ValueError):
    pass


class NonUniformTimeGridError(QCLabError, ValueError):
    pass


class UnderflowGuardError(QCLabError, ValueError):
    pass


class ProbeUnderResolvedError(QCLabError, ValueError):
    pass


class EntangledStateError(QCLabError, ValueError):
    pass


class ConfigError(QCLabError, ValueError):
    pass


class NumericalAbort(QCLabError, RuntimeError):
    """A computation that cannot be trusted and was stopped."""


class FrameDegenerateError(NumericalAbort):
    pass


class PhaseAdvanceError(NumericalAbort):
    pass


class BoundaryLeakageError(NumericalAbort):
    pass


class LinearizationGateError(NumericalAbort):
    pass


class StepSizeError(NumericalAbort):
    pass


class StrideTooCoarseError(NumericalAbort):
    pass


class IntegratorInstabilityError(NumericalAbort):
    pass


class AliasingWarning(UserWarning):
    pass
