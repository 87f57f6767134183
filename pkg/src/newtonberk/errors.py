"""Exception hierarchy.  Each class carries the process exit code the
command-line front end maps it to."""


class NewtonBerkError(Exception):
    exit_code = 5


class InputError(NewtonBerkError):
    exit_code = 2


class PrecisionExhausted(NewtonBerkError):
    """A decision depends on series terms beyond the known truncation."""

    exit_code = 3


class BoundaryAmbiguous(PrecisionExhausted):
    pass


class BackendTolerance(PrecisionExhausted):
    pass


class BudgetExhausted(NewtonBerkError):
    exit_code = 4


class InternalInvariantViolation(NewtonBerkError):
    """A cross-check between two independent computations disagreed."""

    exit_code = 5


class DegenerateOverL(InputError):
    pass


class TypeIInput(InputError):
    pass


class Indeterminate(NewtonBerkError):
    exit_code = 5


class ValidationFailed(InternalInvariantViolation):
    pass


class StabilityCheckFailed(InternalInvariantViolation):
    pass


class NonUniqueStationary(InternalInvariantViolation):
    pass


class TailBoundTooLoose(PrecisionExhausted):
    """A series truncation is too coarse for numeric evaluation at this t."""
