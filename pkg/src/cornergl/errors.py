"""Shared exception types."""


class CornerGLError(Exception):
    """Base class for package errors."""


class GeometryError(CornerGLError):
    """Invalid domain input: bad angle range, non-convex or collinear polygon."""


class ParameterError(CornerGLError):
    """Run parameter outside its admissible range."""


class DiscretizationError(CornerGLError):
    """Inconsistent grid, links, or region data."""


class SolverError(CornerGLError):
    """Iterative solve did not meet its tolerance contract.

    Carries the best iterate found so the caller can inspect or resume.
    """

    def __init__(self, message, best=None, residual=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


class ConvergenceError(SolverError):
    """Descent hit the iteration cap before the gradient tolerance."""
