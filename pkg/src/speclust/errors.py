"""Exception types shared across the package."""


class SpeclustError(Exception):
    """Base class for all library-specific errors."""


class GraphValidationError(SpeclustError, ValueError):
    """Malformed graph input: bad shapes, out-of-range indices, nonpositive weights."""


class DisconnectedGraphError(SpeclustError, ValueError):
    """Raised when an operation requires a connected graph.

    Callers can either restrict to the largest connected component
    (``speclust.graph.largest_component``) or add a demand-graph
    regularizer so the operator becomes definite on the complement of
    the constant vector.
    """


class ConstraintConflictError(SpeclustError, ValueError):
    """A vertex pair appears both as must-link and cannot-link."""


class IllPosedProblemError(SpeclustError, ValueError):
    """The constraint side of the problem is identically zero (or has
    too small a rank) on the space being optimized, so ratios/eigenpairs
    are undefined."""


class DegenerateEigenvectorError(SpeclustError, ValueError):
    """An eigenvector column has (numerically) zero constraint energy and
    cannot be normalized for the embedding."""


class IterativeSolveError(SpeclustError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    Attributes
    ----------
    residual : float
        Relative residual norm at the final iterate.
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = float(residual)
        self.iterations = int(iterations)
