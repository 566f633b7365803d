class GeonetError(Exception):
    """Base class for all library errors."""


class NetStructureError(GeonetError, ValueError):
    """Malformed net: duplicate ids, dangling endpoints, zero-length edges."""


class UnknownVertexError(GeonetError, KeyError):
    pass


class UnbalancedNetError(GeonetError):
    """An identity that needs balanced interior vertices was applied to an unbalanced net."""


class SpecialRadiusError(GeonetError):
    """The circle of radius r passes through a vertex or is tangent to an edge."""

    def __init__(self, message, radius=None, cause=None):
        super().__init__(message)
        self.radius = radius
        self.cause = cause


class PreconditionError(GeonetError, ValueError):
    """Input violates the documented precondition of a construction."""


class ConstructionError(GeonetError):
    """A construction step could not be carried out.

    ``layer`` is the index of the layer being processed when the step failed
    (None outside the layered construction).
    """

    def __init__(self, message, layer=None, step=None):
        super().__init__(message)
        self.layer = layer
        self.step = step


class ClaimViolation(GeonetError):
    """A numerically checked inequality turned out false at working precision."""
