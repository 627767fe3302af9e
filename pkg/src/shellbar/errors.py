"""Exception hierarchy shared by all shellbar modules."""


class ShellbarError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ShellbarError, ValueError):
    """A parametric coordinate lies outside the knot-vector domain."""


class GeometryError(ShellbarError, ValueError):
    """Degenerate geometry: zero tangent cross product, non-positive Jacobian."""


class ConfigError(ShellbarError, ValueError):
    """A model or run configuration violates its schema or invariants."""


class DistortionError(GeometryError):
    """A mesh distortion produced a non-positive element Jacobian."""


class SingularityError(ShellbarError, ArithmeticError):
    """The global stiffness matrix could not be factorized."""

    def __init__(self, message: str, nullity: int | None = None):
        super().__init__(message)
        self.nullity = nullity
