"""Exception types shared across the package."""


class ConeKernelError(Exception):
    """Base class for all package-specific errors."""


# -- geometry ---------------------------------------------------------------

class NonUnitDirection(ConeKernelError, ValueError):
    """A vertex direction is not a unit vector within tolerance."""


class DegenerateFace(ConeKernelError, ValueError):
    """Consecutive cone directions are parallel or antipodal."""


class SelfIntersectingPolygon(ConeKernelError, ValueError):
    """The spherical boundary polygon crosses itself."""


class StraightEdge(ConeKernelError, ValueError):
    """An inner angle equals pi within tolerance (flat wedge)."""


class InvalidPolyhedron(ConeKernelError, ValueError):
    """Polyhedron combinatorics violate the domain assumptions."""


class AssumptionViolated(ConeKernelError):
    """A sampled domain-assumption check failed at a witness point."""

    def __init__(self, point, reason):
        self.point = point
        self.reason = reason
        super().__init__(f"{reason} at {point}")


class PointOutsideDomain(ConeKernelError, ValueError):
    """An evaluation point lies outside the closed domain."""


# -- spectral ---------------------------------------------------------------

class CentroidOutside(ConeKernelError, ValueError):
    """Fan apex fell outside the polygon and ear clipping also failed."""


class MeshTooLarge(ConeKernelError, ValueError):
    """Refinement would exceed the node cap."""


class NoInteriorNodes(ConeKernelError, ValueError):
    """The mesh has no interior degrees of freedom."""


class IterationStall(ConeKernelError, RuntimeError):
    """Inverse power iteration failed to converge."""


class AreaOutOfRange(ConeKernelError, ValueError):
    """Spherical area outside (0, 4*pi) (or outside the bound's range)."""


# -- exponents --------------------------------------------------------------

class NonpositiveEigenvalue(ConeKernelError, ValueError):
    """First Dirichlet eigenvalue must be positive."""


class BadParabolicity(ConeKernelError, ValueError):
    """Parabolicity constants must satisfy 0 < nu1 <= nu2."""


class DimensionMismatch(ConeKernelError, ValueError):
    """Weight-parameter dimensions do not match the domain."""


class UnknownSolid(ConeKernelError, ValueError):
    """Not one of the five Platonic solids."""


# -- weights ----------------------------------------------------------------

class NonpositiveRadius(ConeKernelError, ValueError):
    """Comparison radius r must be positive."""


class ModeInapplicable(ConeKernelError, ValueError):
    """The asymptotic regime's separation hypothesis fails at x."""


# -- sde_mc -----------------------------------------------------------------

class NonSymmetric(ConeKernelError, ValueError):
    """Coefficient matrix is not symmetric within tolerance."""


class NotPositiveDefinite(ConeKernelError, ValueError):
    """Coefficient matrix is not positive definite."""


class StartOnBoundary(ConeKernelError, ValueError):
    """Diffusion start point is not strictly inside the domain."""


class StepTooLarge(ConeKernelError, ValueError):
    """Time step exceeds the simulation horizon."""


class EmptyWindowVolume(ConeKernelError, ValueError):
    """Estimation window does not intersect the domain."""


# -- oracles ----------------------------------------------------------------

class NonpositiveInterval(ConeKernelError, ValueError):
    """Kernel evaluation requires t > s."""


class NonpositiveTime(ConeKernelError, ValueError):
    """Gaussian factor requires dt > 0."""


class UnsupportedAngle(ConeKernelError, ValueError):
    """Image method needs a wedge angle of the form pi/m."""


class SeriesNotConverged(ConeKernelError, RuntimeError):
    """Series truncation cap hit before reaching the requested tolerance."""


# -- verify -----------------------------------------------------------------

class InadmissibleLambda(ConeKernelError, ValueError):
    """Weight parameters outside the admissible open intervals."""


class InsufficientPaths(ConeKernelError, RuntimeError):
    """Monte Carlo error dominates the signal."""


class SignalBelowNoise(ConeKernelError, RuntimeError):
    """Too few usable points remain for a decay fit."""


class QuadratureNotConverged(ConeKernelError, RuntimeError):
    """Composition quadrature failed to reach its tolerance."""


class HorizonTooShort(ConeKernelError, ValueError):
    """Long-time fit window is empty for the given horizon."""


# -- cli --------------------------------------------------------------------

class ConfigError(ConeKernelError, ValueError):
    """Bad command-line configuration or unparsable input file."""


class VerificationFailed(ConeKernelError):
    """A verification subcommand detected a bound/identity failure."""
