"""Newton/continuation solver for the shifted curvature equation.

The unknown is phi = exp(u) on S^n. The equation

    sigma_n(A[phi]) / sigma_{n-k}(A[phi]) = phi^(-k) f,    f = 1 / f_tilde,

is solved in log form along the homotopy f_t = (1 - t) gamma + t f, starting
from the constant solution at t = 0. Iterates stay even and inside the cone
A[phi] > 0.
"""

import logging
from dataclasses import dataclass, field, replace
from math import comb

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import bisect

from . import horo, sphere, symfunc
from .errors import (ContinuationError, LineSearchStallError, NonConvergenceError,
                     NonPositiveDataError)
from .horo import SupportFunction
from .sphere import ScalarField

log = logging.getLogger(__name__)

EVEN_TOL = 1e-12
STEP_FLOOR = 2.0 ** -30
LINEAR_RTOL = 1e-10
REFINE_STEPS = 3


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    n: int
    k: int
    f_tilde: ScalarField
    gamma: float = None
    f: ScalarField = None

    def __post_init__(self):
        grid = self.f_tilde.grid
        if self.n != grid.n:
            raise ValueError(f"n={self.n} does not match grid dimension {grid.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k={self.k} outside [1, {self.n}]")
        ft = self.f_tilde.values
        if np.any(ft <= 0):
            node = int(np.argmin(ft))
            raise NonPositiveDataError(f"f_tilde must be positive (value {ft[node]:.6g} at node {node})")
        defect = np.max(np.abs(ft - ft[grid.antipode_index]))
        if defect > EVEN_TOL:
            raise NonPositiveDataError(f"f_tilde is not even (defect {defect:.3g})")
        if self.f is None:
            object.__setattr__(self, "f", ScalarField(grid, 1.0 / ft))
        if self.gamma is None:
            object.__setattr__(self, "gamma", geometric_mean(self.f))
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @classmethod
    def from_f(cls, n, k, f, gamma=None):
        """Build from f directly (f_tilde = 1/f), keeping f bit-exact."""
        return cls(n, k, ScalarField(f.grid, 1.0 / f.values), gamma, f)

    @property
    def grid(self):
        return self.f_tilde.grid

    def rhs(self, t):
        return (1.0 - t) * self.gamma + t * self.f.values


@dataclass(frozen=True, eq=False)
class ContinuationState:
    t: float
    phi: SupportFunction
    residual_norm: float
    min_eig_A: float
    max_eig_A: float
    newton_iters: int = 0
    converged: bool = False
    step_history: list = field(default_factory=list)


def geometric_mean(f):
    return float(np.exp(sphere.integrate(ScalarField(f.grid, np.log(f.values))) / f.grid.area))


def choose_gamma(spec):
    """Homotopy anchor: the geometric mean of f over the sphere."""
    return geometric_mean(spec.f)


def constant_solution(n, k, gamma):
    """The c > 1 with c^k ((c - 1/c)/2)^k = C(n, k) gamma."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return float(np.sqrt(1.0 + 2.0 * (comb(n, k) * gamma) ** (1.0 / k)))


def _log_quotient(A, n, k):
    return np.log(symfunc.sigma_matrix(A, n)) - np.log(symfunc.sigma_matrix(A, n - k))


def residual(spec, sf, t):
    """log sigma_n(A) - log sigma_{n-k}(A) + k log phi - log f_t, per node."""
    A = horo.build_A(sf)
    horo.require_positive_definite(A)
    phi = sf.phi.values
    vals = _log_quotient(A, spec.n, spec.k) + spec.k * np.log(phi) - np.log(spec.rhs(t))
    return ScalarField(sf.grid, vals)


def jacobian(spec, sf, t):
    """Sparse derivative of ``residual`` with respect to the nodal values of phi."""
    grid = sf.grid
    n, k = spec.n, spec.k
    ops = grid.operators
    A = horo.build_A(sf)
    horo.require_positive_definite(A)
    phi = sf.phi.values
    grad = sphere.derivatives(sf.phi).grad

    B = symfunc.sigma_gradient(A, n) / np.asarray(symfunc.sigma_matrix(A, n))[:, None, None]
    if n - k >= 1:
        B -= (symfunc.sigma_gradient(A, n - k)
              / np.asarray(symfunc.sigma_matrix(A, n - k))[:, None, None])
    trB = np.trace(B, axis1=1, axis2=2)

    J = sp.csr_matrix((grid.size, grid.size))
    for a in range(n):
        for b in range(n):
            J = J + sp.diags(B[:, a, b]) @ ops[("hess", a, b)]
        J = J - sp.diags(trB * grad[:, a] / phi) @ ops[("grad", a)]
    gsq = np.sum(grad ** 2, axis=-1)
    diag = trB * (0.5 * gsq / phi ** 2 + 0.5 * (1.0 + 1.0 / phi ** 2)) + k / phi
    return (J + sp.diags(diag)).tocsr()


def _even_solve(J, rhs, grid):
    """Solve J d = rhs over even d, assuming J commutes with the antipodal map."""
    anti = grid.antipode_index
    idx = np.arange(grid.size)
    reps = idx[idx < anti]
    Jr = J[reps]
    Jr = (Jr[:, reps] + Jr[:, anti[reps]]).tocsc()
    b = rhs[reps]
    lu = spla.splu(Jr)
    d = lu.solve(b)
    bnorm = max(np.linalg.norm(b), np.finfo(float).tiny)
    for _ in range(REFINE_STEPS):
        r = b - Jr @ d
        if np.linalg.norm(r) <= LINEAR_RTOL * bnorm:
            break
        d = d + lu.solve(r)
    rel = np.linalg.norm(b - Jr @ d) / bnorm
    if rel > LINEAR_RTOL:
        log.debug("linear solve relative residual %.3g above %.1g", rel, LINEAR_RTOL)
    out = np.empty(grid.size)
    out[reps] = d
    out[anti[reps]] = d
    return out


def _eig_range(A):
    lam = symfunc.eigvalsh_small(A)
    return float(lam[:, 0].min()), float(lam[:, -1].max())


def _make_state(spec, sf, t, norm, iters, converged, history):
    lo, hi = _eig_range(horo.build_A(sf))
    return ContinuationState(t, sf, norm, lo, hi, iters, converged, list(history))


def initial_state(spec, t=0.0, phi=None):
    """State at ``t`` from ``phi`` (default: the constant solution for gamma)."""
    grid = spec.grid
    if phi is None:
        c = constant_solution(spec.n, spec.k, spec.gamma)
        phi = ScalarField(grid, np.full(grid.size, c))
    sf = SupportFunction.from_phi(phi)
    norm = float(np.max(np.abs(residual(spec, sf, t).values)))
    return _make_state(spec, sf, t, norm, 0, False, [])


def roundoff_floor(J, phi, grid):
    """Residual level set by rounding: eps ||J||_inf max |phi(neighbour) - phi|.

    Derivatives act on neighbour differences (see ``sphere.derivatives``), so
    rounding enters at the scale of the local variation of phi rather than of
    phi itself.
    """
    nb, _ = grid.difference_form
    row_sums = np.asarray(abs(J).sum(axis=1)).ravel()
    spread = float(np.max(np.abs(phi[nb] - phi)))
    return float(np.finfo(float).eps * max(spread, np.finfo(float).eps) * row_sums.max())


def _try_point(spec, values, t):
    """Residual norm at a candidate, or None if it leaves the admissible set."""
    if np.any(values <= 1.0):
        return None
    sf = SupportFunction.from_phi(ScalarField(spec.grid, values))
    A = horo.build_A(sf)
    if not np.all(symfunc.is_positive_definite(A)):
        return None
    return sf, float(np.max(np.abs(residual(spec, sf, t).values)))


def newton_solve(spec, state, tol=1e-10, max_iter=25):
    """Damped Newton at fixed t with a cone-safeguarded backtracking line search.

    A step is accepted once phi + s*d stays above 1, keeps A > 0 at every node
    and lowers the residual max-norm. The stopping test is
    ``max(tol, roundoff_floor)``, so a tolerance below what rounding permits
    on very fine grids ends the iteration instead of stalling the line search.
    """
    t = state.t
    grid = spec.grid
    sf = state.phi
    R = residual(spec, sf, t).values
    norm = float(np.max(np.abs(R)))
    history = list(state.step_history)
    if norm <= tol:
        return _make_state(spec, sf, t, norm, 0, True, history)

    for it in range(1, max_iter + 1):
        J = jacobian(spec, sf, t)
        if it == 1:
            tol = max(tol, roundoff_floor(J, sf.phi.values, grid))
            if norm <= tol:
                return _make_state(spec, sf, t, norm, 0, True, history)
        step = _even_solve(J, -R, grid)
        s = 1.0
        while True:
            trial = _try_point(spec, sf.phi.values + s * step, t)
            if trial is not None and trial[1] < norm:
                break
            s *= 0.5
            if s < STEP_FLOOR:
                best = _make_state(spec, sf, t, norm, it, False, history)
                raise LineSearchStallError(
                    f"line search stalled at t={t:.6g}, residual {norm:.3e}", state=best)
        sf = SupportFunction.from_phi(sphere.even_project(trial[0].phi))
        R = residual(spec, sf, t).values
        norm = float(np.max(np.abs(R)))
        log.debug("t=%.6g newton %d: step %.3g residual %.3e", t, it, s, norm)
        if norm <= tol:
            return _make_state(spec, sf, t, norm, it, True, history)

    best = _make_state(spec, sf, t, norm, max_iter, False, history)
    raise NonConvergenceError(
        f"Newton did not reach {tol:.1e} in {max_iter} iterations at t={t:.6g} "
        f"(residual {norm:.3e})", state=best)


def continuation_solve(spec, steps=10, tol=1e-10, max_iter=25, min_dt=1e-4, easy_iters=3):
    """Follow the homotopy from the constant solution at t = 0 to t = 1.

    The t-increment starts at 1/steps, halves on Newton failure and grows by
    1.5x after steps that converge within ``easy_iters`` iterations.
    """
    state = newton_solve(spec, initial_state(spec, 0.0), tol, max_iter)
    history = [(0.0, state.newton_iters, state.residual_norm)]
    dt = 1.0 / steps
    t = 0.0
    while t < 1.0:
        t_new = min(1.0, t + dt)
        try:
            trial = newton_solve(spec, replace(state, t=t_new, converged=False), tol, max_iter)
        except (NonConvergenceError, ValueError) as exc:
            dt *= 0.5
            log.info("step to t=%.6g failed (%s); dt -> %.3g", t_new, exc, dt)
            if dt < min_dt:
                last = replace(state, step_history=history)
                raise ContinuationError(
                    f"continuation step underflow after t={t:.6g}", state=last) from exc
            continue
        t = t_new
        history.append((t, trial.newton_iters, trial.residual_norm))
        state = trial
        if trial.newton_iters <= easy_iters:
            dt *= 1.5
    return replace(state, step_history=history)


def g_function(x, k):
    """x^(2k) 2^(-k) (1 - x^-2)^k, increasing on [1, inf)."""
    return x ** (2 * k) * 2.0 ** (-k) * (1.0 - x ** -2) ** k


def g_inverse(y, k, hi=1e10, xtol=1e-12):
    if y <= 0:
        return 1.0
    return bisect(lambda x: g_function(x, k) - y, 1.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps,
                  maxiter=500)


def apriori_bounds(spec):
    """Two-sided bounds on phi for even solutions.

    At a maximum of phi the equation gives g(max phi) >= C(n,k) min f, at a
    minimum g(min phi) <= C(n,k) max f; the midpoint inequality
    (max + 1/max)/2 <= min converts these into a lower and an upper bound.
    """
    c = comb(spec.n, spec.k)
    f = spec.f.values
    m = g_inverse(c * float(f.min()), spec.k)
    M = g_inverse(c * float(f.max()), spec.k)
    low = 0.5 * (m + 1.0 / m)
    high = M + np.sqrt(M * M - 1.0)
    return float(low), float(high)


def midpoint_check(sf):
    """min phi - (max phi + 1/max phi)/2; non-negative for even solutions."""
    phi = sf.phi.values if isinstance(sf, SupportFunction) else np.asarray(sf.values)
    top = float(phi.max())
    return float(phi.min()) - 0.5 * (top + 1.0 / top)


def linearization_constant(n, k, c):
    """a(n, k, c) in L_c = a (Laplacian + n) at the constant solution c."""
    a0 = 0.5 * (c - 1.0 / c)
    lam = np.full(n, a0)
    q = symfunc.sigma(lam, n) / symfunc.sigma(lam, n - k)
    return k / n * 2.0 / (c - 1.0 / c) * q
