"""Exception hierarchy shared by every module."""


class NonlocalError(Exception):
    """Base class for all errors raised by the package."""


class DivergentTail(NonlocalError):
    """A tail integral against the kernel does not converge."""


class OutOfStencil(NonlocalError):
    """A finite-difference stencil leaves the grid."""


class SingularArgument(NonlocalError):
    """The kernel was evaluated at y = 0."""


class NonHolderKernel(NonlocalError):
    """The kernel modulation is not Hölder continuous in y."""


class IntegerOrder(NonlocalError):
    """An exponent that must be non-integer is an integer."""


class BadMeasure(NonlocalError):
    """A discrete measure has negative or unnormalized weights."""


class OutOfDomain(NonlocalError):
    """An evaluation point lies outside the grid domain."""


class NonDominantMatrix(NonlocalError):
    """The assembled system is not a strictly dominant M-matrix."""


class MaxIterations(NonlocalError):
    """An iteration hit its cap before meeting the tolerance."""


class NoContraction(NonlocalError):
    """The fixed-point map failed to contract."""


class Unsupported(NonlocalError):
    """The combination of tail data and kernel has no closed-form route."""
