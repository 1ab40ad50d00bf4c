"""Exception types raised by gramrig."""


class GramrigError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(GramrigError, ValueError):
    """Inconsistent problem shape, mask or scenario request."""


class SpanningError(GramrigError):
    """The spanning assumption rank(P) = D cannot hold for the request."""


class RankComputationError(GramrigError):
    """A rank backend failed (non-convergent SVD, non-integer input...)."""


class MixedSideError(GramrigError, ValueError):
    """Knowledge on both the state and the measurement Gram blocks."""


class NotUniqueError(GramrigError):
    """The known entries do not determine the unknown symmetric matrix."""


class InconsistentKnowledgeError(GramrigError):
    """The supplied values cannot be produced by any symmetric matrix."""


class NoRealConfigurationError(GramrigError):
    """The recovered matrix is not positive definite."""
