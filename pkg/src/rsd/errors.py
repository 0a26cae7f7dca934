"""Exception hierarchy shared by the numerical and algorithmic layers."""


class RSDError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RSDError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(RSDError, ArithmeticError):
    """An iterative numerical scheme did not converge within its cap."""


class BoundUndefinedError(RSDError, ArithmeticError):
    """A bound has a vanishing denominator (e.g. H_{1,eps'} == 1)."""


class UnboundedRuntimeError(BoundUndefinedError):
    """The expected running time of an RSD algorithm is infinite."""


class DimensioningError(RSDError):
    """The requested design targets cannot be met."""


class CapabilityError(RSDError):
    """A problem lacks a capability the requested algorithm needs."""


class SolverError(RSDError):
    """A scenario solve did not return an optimal solution."""
