"""Exception hierarchy shared by all morsecert modules."""


class MorsecertError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(MorsecertError):
    """A matrix expected to be symmetric positive definite is not."""


class DegenerateVector(MorsecertError):
    """A vector-valued quantity has zero norm where a direction is needed."""


class DegenerateSegment(MorsecertError):
    """Two points expected to span a segment coincide."""


class NearSingularMargin(MorsecertError):
    """A segment's chamber-wall margin is below the configured floor.

    Flag extraction from such a segment would be numerically meaningless,
    so operations refuse rather than guess.
    """


class FaceMismatch(MorsecertError):
    """Two flags (or a flag and a type datum) disagree on face type."""


class NotASubface(MorsecertError):
    """Requested face is not contained in the source flag's face."""


class NotIotaInvariant(MorsecertError):
    """A face type required to be closed under k -> n-k is not."""


class NotOpposite(MorsecertError):
    """A pair of flags required to be transverse is not."""


class NotThetaRegular(MorsecertError):
    """A segment required to have type inside the given Theta set does not."""


class NoConvergence(MorsecertError):
    """An iterative routine exhausted its budget.

    Carries the best iterate found and the residual at that iterate.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class PathTooShort(MorsecertError):
    """An orbit path has too few points for the requested check."""


class NumericalBlowup(MorsecertError):
    """A word product crossed the condition-number circuit breaker."""


class PowerStabilizationFailed(MorsecertError):
    """Axis flags of an element did not stabilize within the power budget."""


class SchemaError(MorsecertError):
    """An input document violates the representation schema.

    The message names the offending field.
    """


class InputError(MorsecertError):
    """Malformed in-memory input (e.g. generator with determinant far from 1)."""
