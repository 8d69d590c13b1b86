import numpy as np
import pytest

from shiftcurv import solver, sphere
from shiftcurv.horo import SupportFunction
from shiftcurv.sphere import ScalarField


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def p2(z):
    return 0.5 * (3.0 * z * z - 1.0)


def quadratic_spec(n_theta, n_phi, beta=0.3, k=1):
    grid = sphere.build_grid(2, n_theta, n_phi)
    z = grid.nodes[:, 2]
    return solver.ProblemSpec(2, k, ScalarField(grid, 1.0 / (1.0 + beta * z * z)))


def manufactured_spec(grid, phi_star, k):
    """Problem whose discrete root is exactly phi_star (f read off the residual)."""
    sf = SupportFunction.from_phi(phi_star)
    zero = solver.ProblemSpec.from_f(grid.n, k, ScalarField(grid, np.ones(grid.size)), gamma=1.0)
    # with f = 1 and t = 1 the residual is log quotient + k log phi, i.e. log f*
    log_f = solver.residual(zero, sf, 1.0).values
    f = sphere.even_project(ScalarField(grid, np.exp(log_f)))
    return solver.ProblemSpec.from_f(grid.n, k, f)


def random_even_phi(grid, rng, base=None, amp=0.15, terms=4):
    """Smooth random even phi = base + sum of products of coordinates of even degree."""
    x = grid.nodes
    d = x.shape[1]
    base = rng.uniform(1.8, 4.0) if base is None else base
    vals = np.full(grid.size, base)
    for _ in range(terms):
        i, j = rng.integers(0, d, size=2)
        vals += amp * rng.uniform(-1, 1) * x[:, i] * x[:, j]
    return ScalarField(grid, vals)


@pytest.fixture(scope="session")
def quad_solutions():
    """Continuation solves of f~ = 1/(1 + 0.3 z^2) at 32x64 and 64x128."""
    out = {}
    for shape in [(32, 64), (64, 128)]:
        spec = quadratic_spec(*shape)
        out[shape] = (spec, solver.continuation_solve(spec))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
