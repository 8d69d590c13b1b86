"""Exception types shared across the package."""


class ConeViolationError(ValueError):
    """A matrix that must be positive definite is not.

    ``node`` is the flat grid index of the first offending node (``None`` for
    single-matrix calls) and ``min_eig`` the smallest eigenvalue found there.
    """

    def __init__(self, message, node=None, min_eig=None):
        super().__init__(message)
        self.node = node
        self.min_eig = min_eig


class HConvexityError(ValueError):
    """Shifted principal curvatures are not all positive."""

    def __init__(self, message, node=None, min_kappa=None):
        super().__init__(message)
        self.node = node
        self.min_kappa = min_kappa


class GeometryError(ValueError):
    """Degenerate or inconsistent embedded geometry."""


class NonConvergenceError(RuntimeError):
    """Newton iteration hit ``max_iter``; ``state`` holds the best iterate."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class LineSearchStallError(NonConvergenceError):
    """Backtracking shrank the step below the floor without acceptance."""


class ContinuationError(RuntimeError):
    """The homotopy step size underflowed; ``state`` is the last good state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class NonPositiveDataError(ValueError):
    """Prescribed curvature data is not strictly positive (or not even)."""
