"""Exception hierarchy shared by all cpeps modules."""


class CPEPSError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(CPEPSError):
    """A computation could not be carried out to the requested accuracy."""


class DomainError(CPEPSError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularSystem(NumericalError):
    """The virtual-field quadratic form is numerically singular."""


class TopologyError(CPEPSError, ValueError):
    """The parameter set does not have the required chain topology."""


class DegenerateDenominator(NumericalError):
    """The determinant of the virtual block vanishes identically."""


class InterpolationError(NumericalError):
    """Polynomial reconstruction from samples failed."""


class PoleError(NumericalError):
    """A rational function was evaluated at (or next to) a pole."""


class NonPhysical(DomainError):
    """A dispersion is not real and positive on the requested domain."""


class PadeDegenerate(UserWarning):
    """The Hankel system of a Padé problem is singular; order was reduced."""


class QuadratureFailure(NumericalError):
    """Adaptive quadrature did not reach its tolerance within budget."""


class InfeasibleStart(CPEPSError, ValueError):
    """The optimizer was started from an inadmissible point."""


class ObjectiveFailure(NumericalError):
    """The objective could not be evaluated."""


class ShapeMismatch(CPEPSError, ValueError):
    """Kernel and representation (or layout) dimensions disagree."""


class NonUnitaryRep(CPEPSError, ValueError):
    """A representation matrix is not unitary."""


class NonGaussianInput(CPEPSError, ValueError):
    """Input data cannot be represented by a first-derivative Gaussian kernel."""


class NonPositiveC(CPEPSError, ValueError):
    """The physical mass term c is not strictly positive."""


class ConfigError(CPEPSError, ValueError):
    """A run configuration is malformed or contains unknown keys."""
