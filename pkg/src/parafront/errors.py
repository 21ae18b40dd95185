"""Exception types shared across the package."""


class GeometryError(Exception):
    """Base class for domain-level failures (CLI exit code 3)."""


class SurfaceFormatError(GeometryError):
    """A surface description file is malformed (CLI exit code 2)."""


class ChartDomainError(GeometryError):
    """Query point lies outside the validity of the surface chart."""


class NonRegularPointError(GeometryError):
    """The parametrisation is not an immersion at the query point."""


class NumericalQualityError(GeometryError):
    """A residual check failed; the computed data cannot be trusted."""


class UmbilicNeighborhoodError(GeometryError):
    """Principal-field derivatives were requested too close to an umbilic.

    Use the umbilic pathway (Monge reduction plus umbilic classification)
    instead of directional curvature derivatives.
    """


class NotSingularPointError(GeometryError):
    """Front classification requested at a point where the offset is regular."""


class NoFocalPointError(GeometryError):
    """The requested principal curvature vanishes: focal point at infinity."""


class UnsupportedGermError(GeometryError):
    """Germ class is outside the recognised table (A1 or worse than A4/D4)."""
