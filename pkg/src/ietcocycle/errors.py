"""Exception hierarchy shared by all modules."""


class IetError(Exception):
    """Base class for every error raised by :mod:`ietcocycle`."""


class NotABijection(IetError, ValueError):
    pass


class Reducible(IetError, ValueError):
    def __init__(self, k):
        super().__init__(f"permutation is reducible: the first {k} letters coincide")
        self.k = k


class InconsistentParity(IetError, RuntimeError):
    """d - kappa + 1 came out odd; this is a bug, not bad input."""


class NonPositiveLength(IetError, ValueError):
    pass


class PrecisionExhausted(IetError, ArithmeticError):
    """Two distinct breakpoints (or a length) fell below the separation floor."""


class TieBreakUndefined(IetError, ArithmeticError):
    """The last top and bottom intervals have equal length: Rauzy induction is undefined."""


class StepCapExceeded(IetError, RuntimeError):
    pass


class NonComposablePath(IetError, ValueError):
    pass


class NonPositiveEntry(IetError, ValueError):
    pass


class DimensionMismatch(IetError, ValueError):
    pass


class BadPermutationShape(IetError, ValueError):
    pass


class NotPrime(IetError, ValueError):
    pass


class BoundViolated(IetError, RuntimeError):
    pass


class DegenerateInterval(IetError, ValueError):
    pass


class OutOfDomain(IetError, ValueError):
    pass


class NonMatchingBreakpoints(IetError, RuntimeError):
    """Edge identifications of a square surface disagree; internal bug."""
