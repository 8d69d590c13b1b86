"""Numerical solver and verification suite for prescribed shifted mean curvature
of even, uniformly h-convex hypersurfaces in hyperbolic space."""

from .errors import (ConeViolationError, ContinuationError, GeometryError, HConvexityError,
                     LineSearchStallError, NonConvergenceError, NonPositiveDataError)
from .horo import SupportFunction, embed, to_poincare
from .solver import ProblemSpec, apriori_bounds, constant_solution, continuation_solve, newton_solve
from .sphere import ScalarField, build_grid
from .verify import measure_curvatures, verify_solution, weingarten_crosscheck

__version__ = "0.1.0"
