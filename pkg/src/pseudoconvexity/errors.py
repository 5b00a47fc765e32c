"""Exception types raised by the construction and verification routines."""


class PseudoconvexityError(Exception):
    """Base class for all errors raised by this package."""


class ConstraintViolation(PseudoconvexityError):
    """A constructed object fails one of its defining inequalities."""


class Infeasible(PseudoconvexityError):
    """No parameter choice satisfies the requested constraints."""


class NotOnPlateau(PseudoconvexityError):
    """The point lies in no plateau interior up to the truncation depth."""


class DegenerateGradient(PseudoconvexityError):
    """The defining function has a (numerically) vanishing derivative."""


class OutsideDomain(PseudoconvexityError):
    """A point handed to a kernel routine is not inside the domain."""


class SingularGram(PseudoconvexityError):
    """The regularised Gram matrix is too ill-conditioned to trust."""


class DiscExits(PseudoconvexityError):
    """A sampled point of an analytic disc left the domain."""


class NonNegativeWitness(PseudoconvexityError):
    """A witness function took a non-negative value on the domain."""


class NotStrictlyPseudoconvex(PseudoconvexityError):
    """The restricted Levi form is not positive definite with margin."""


class GrowthTargetUnreachable(PseudoconvexityError):
    """The basis span cannot meet the growth target at some level.

    Attributes
    ----------
    level : int
        Level ``k`` at which the target failed.
    achieved : float
        Largest value ``|f(z_k)|`` reachable with a unit-norm function.
    target : float
        The value that was required.
    """

    def __init__(self, level, achieved, target, trace=None):
        self.level = level
        self.achieved = achieved
        self.target = target
        self.trace = trace
        super().__init__(
            f"growth target unreachable at level {level}: "
            f"achieved {achieved:.6g} < target {target:.6g}"
        )


class DomainError(PseudoconvexityError, ValueError):
    """Argument outside the mathematical domain of a transform."""


class ConfigError(PseudoconvexityError, ValueError):
    """Pipeline configuration out of its documented range."""


class CacheCorruption(PseudoconvexityError):
    """A cache entry does not match its content hash."""
