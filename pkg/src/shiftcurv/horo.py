"""Horospherical support functions and the hypersurfaces they describe.

Minkowski space R^{n+1,1} is stored with the time coordinate last,
X = (X^1, ..., X^{n+1}, X^0), and pairing <X, Y> = sum X^i Y^i - X^0 Y^0.
A body is described by phi = exp(u) on S^n, where u is its horospherical
support function; it is uniformly h-convex iff A[phi] > 0 everywhere.
"""

from dataclasses import dataclass

import numpy as np

from . import sphere, symfunc
from .errors import ConeViolationError, GeometryError, HConvexityError
from .sphere import ScalarField


def minkowski(X, Y):
    """Lorentzian pairing along the last axis."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    return np.sum(X[..., :-1] * Y[..., :-1], axis=-1) - X[..., -1] * Y[..., -1]


def null_lift(x):
    """(x, 1) for unit vectors x; the null direction of the ideal point x."""
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1)


@dataclass(frozen=True, eq=False)
class SupportFunction:
    phi: ScalarField
    u: ScalarField

    def __post_init__(self):
        if np.any(self.phi.values <= 1.0):
            raise ValueError("phi must exceed 1 at every node")

    @classmethod
    def from_phi(cls, phi):
        return cls(phi, ScalarField(phi.grid, np.log(phi.values)))

    @classmethod
    def from_u(cls, u):
        return cls(ScalarField(u.grid, np.exp(u.values)), u)

    @property
    def grid(self):
        return self.phi.grid


@dataclass(frozen=True, eq=False)
class HyperboloidPatch:
    grid: sphere.SphereGrid
    points: np.ndarray   # (size, n + 2)
    normals: np.ndarray  # (size, n + 2)


@dataclass(frozen=True, eq=False)
class ShiftedCurvatures:
    kappa_tilde: np.ndarray  # (size, n), ascending per node
    H_tilde_k: np.ndarray    # (size,)
    radii: np.ndarray        # (size, n)
    k: int


def build_A(sf):
    """A[phi] = D^2 phi - |D phi|^2/(2 phi) I + (phi - 1/phi)/2 I, per node."""
    phi = sf.phi.values
    d = sphere.derivatives(sf.phi)
    n = sf.grid.n
    shift = (0.5 * (phi - 1.0 / phi) - 0.5 * np.sum(d.grad ** 2, axis=-1) / phi)
    return d.hess + shift[:, None, None] * np.eye(n)


def min_eigenvalue(A):
    return symfunc.eigvalsh_small(A)[:, 0]


def require_positive_definite(A):
    """Raise ConeViolationError naming the first node where A is not > 0."""
    ok = symfunc.is_positive_definite(A)
    if not np.all(ok):
        node = int(np.flatnonzero(~ok)[0])
        lmin = float(min_eigenvalue(A[node:node + 1])[0])
        raise ConeViolationError(
            f"A[phi] not positive definite at node {node} (min eigenvalue {lmin:.6g})",
            node=node, min_eig=lmin)


def shifted_weingarten(sf, A):
    """W~ = (phi A)^(-1) per node; its eigenvalues are kappa_i - 1."""
    require_positive_definite(A)
    return np.linalg.inv(sf.phi.values[:, None, None] * A)


def shifted_curvatures(W, k):
    W = np.asarray(W, dtype=float)
    n = W.shape[-1]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    kt = symfunc.eigvalsh_small(W)
    if np.any(kt[:, 0] <= 0):
        node = int(np.argmin(kt[:, 0]))
        raise HConvexityError(
            f"non-positive shifted curvature {kt[node, 0]:.6g} at node {node}",
            node=node, min_kappa=float(kt[node, 0]))
    return ShiftedCurvatures(kt, symfunc.sigma(kt, k), 1.0 / kt, k)


def embed(sf):
    """Inverse horospherical Gauss map X(x) together with outward normals.

    X = phi/2 (-x, 1) + (|D phi|^2 + 1)/(2 phi) (x, 1) - (D phi, 0), and
    nu = X - (x, 1)/phi.
    """
    grid = sf.grid
    phi = sf.phi.values
    d = sphere.derivatives(sf.phi)
    grad_amb = sphere.to_ambient(grid, d.grad)
    x = grid.nodes
    a = 0.5 * phi
    b = 0.5 * (np.sum(d.grad ** 2, axis=-1) + 1.0) / phi
    spatial = (b - a)[:, None] * x - grad_amb
    points = np.concatenate([spatial, (a + b)[:, None]], axis=-1)
    normals = points - null_lift(x) / phi[:, None]
    return HyperboloidPatch(grid, points, normals)


def support_from_patch(patch, directions, chunk=2048):
    """Discrete support: max over patch points of log(-<X, (x, 1)>) per direction."""
    pts = np.asarray(patch.points if isinstance(patch, HyperboloidPatch) else patch, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[0] == 0:
        raise ValueError("empty patch")
    # -<X, (x, 1)> = X^0 - X_spatial . x
    x = directions.nodes
    out = np.empty(directions.size)
    for start in range(0, directions.size, chunk):
        pair = pts[None, :, -1] - x[start:start + chunk] @ pts[:, :-1].T
        if np.any(pair <= 0):
            raise GeometryError("patch point outside every horo-ball of some direction")
        out[start:start + chunk] = np.log(pair.max(axis=1))
    return ScalarField(directions, out)


def to_poincare(patch):
    """Hyperboloid -> Poincare ball, p = X_spatial / (1 + X^0)."""
    pts = patch.points if isinstance(patch, HyperboloidPatch) else np.asarray(patch, dtype=float)
    return pts[..., :-1] / (1.0 + pts[..., -1:])


def constant_radius(c):
    """Geodesic radius of the sphere described by phi == c."""
    return float(np.arccosh(0.5 * (c + 1.0 / c)))
