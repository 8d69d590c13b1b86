"""Pole-free latitude-longitude grids on S^1 and S^2 with covariant finite differences.

Nodes on S^2 sit at cell-centred colatitudes theta_i = (i + 1/2) pi / n_theta and
longitudes phi_j = 2 pi j / n_phi, flattened row-major (flat index i * n_phi + j).
Stencils that step across a pole use the ghost rule value(-theta, phi) =
value(theta, phi + pi), so each pole row couples to its own longitude-shifted copy.

All differential operators are assembled once per grid as sparse matrices, which
the Newton solver reuses for the Jacobian.

The longitude stencils are three-point central differences whose denominators
are fitted to sin/cos (2 sin h instead of 2h, 4 sin^2(h/2) instead of h^2), so
they are exact on the first azimuthal harmonic. The colatitude first derivative
(alone and inside the mixed derivative) uses a five-point stencil: fourth order,
with weights fitted so it is also exact on sin/cos. The frame Hessian divides
theta-derivatives by sin(theta) ~ h/2 on the pole rows; for data with odd
azimuthal order the theta-profile is odd across the pole, so a second-order
theta stencil would leave an O(h) error there. The colatitude second
difference keeps the plain h^2 denominator; it is never divided by sin(theta).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True, eq=False)
class SphereGrid:
    n: int
    n_theta: int
    n_phi: int
    nodes: np.ndarray
    weights: np.ndarray
    antipode_index: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def shape(self):
        return (self.n_theta, self.n_phi) if self.n == 2 else (self.n_phi,)

    @property
    def dtheta(self):
        return np.pi / self.n_theta

    @property
    def dphi(self):
        return 2.0 * np.pi / self.n_phi

    @property
    def h(self):
        """Largest coordinate spacing; the mesh parameter for O(h^2) slack."""
        return max(self.dtheta, self.dphi) if self.n == 2 else self.dphi

    @property
    def area(self):
        return 4.0 * np.pi if self.n == 2 else 2.0 * np.pi

    def field(self, values):
        return ScalarField(self, values)

    def evaluate(self, func):
        """Sample ``func(x)`` on the nodes; ``x`` has shape (size, n + 1)."""
        return ScalarField(self, np.asarray(func(self.nodes), dtype=float))

    @cached_property
    def frame(self):
        """Orthonormal tangent frame per node, shape (size, n, n + 1).

        (e_theta, e_phi) on S^2 and the counter-clockwise tangent on S^1.
        """
        x = self.nodes
        if self.n == 1:
            return np.stack([-x[:, 1], x[:, 0]], axis=-1)[:, None, :]
        s = np.hypot(x[:, 0], x[:, 1])
        cphi, sphi = x[:, 0] / s, x[:, 1] / s
        e_theta = np.stack([x[:, 2] * cphi, x[:, 2] * sphi, -s], axis=-1)
        e_phi = np.stack([-sphi, cphi, np.zeros_like(s)], axis=-1)
        return np.stack([e_theta, e_phi], axis=1)

    @cached_property
    def stencils(self):
        """Raw coordinate difference matrices keyed by 'theta', 'phi', 'thetatheta', ..."""
        return coordinate_stencils(self)

    @cached_property
    def operators(self):
        """Frame-component operators: ('grad', a) and ('hess', a, b) -> sparse matrix."""
        return _frame_operators(self)

    @cached_property
    def difference_form(self):
        """Neighbour table and per-operator tap weights acting on neighbour differences."""
        return _difference_form(self)


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class FrameDerivatives:
    grad: np.ndarray  # (size, n)
    hess: np.ndarray  # (size, n, n)


def _mirrored_trig(angles, period_half):
    """cos/sin tables with exact sign symmetry under the antipodal shift."""
    c, s = np.cos(angles), np.sin(angles)
    m = period_half
    c[m:], s[m:] = -c[:m], -s[:m]
    return c, s


def build_grid(n, n_theta=None, n_phi=64):
    """Structured grid on S^n for n in {1, 2}.

    ``n_phi`` must be even so the antipodal map permutes nodes exactly; for
    n = 2 the antipode of (i, j) is (n_theta - 1 - i, (j + n_phi/2) mod n_phi).
    """
    if n not in (1, 2):
        raise ValueError(f"only S^1 and S^2 are supported, got n={n}")
    if n_phi % 2 or n_phi < 8:
        raise ValueError(f"n_phi must be even and >= 8, got {n_phi}")
    dphi = 2.0 * np.pi / n_phi
    phi_1d = np.arange(n_phi) * dphi
    cphi, sphi = _mirrored_trig(phi_1d, n_phi // 2)
    half = n_phi // 2
    shift = (np.arange(n_phi) + half) % n_phi

    if n == 1:
        nodes = np.stack([cphi, sphi], axis=-1)
        weights = np.full(n_phi, dphi)
        return SphereGrid(1, 1, n_phi, nodes, weights, shift.copy(),
                          np.full(n_phi, np.pi / 2), phi_1d.copy())

    if n_theta is None or n_theta < 4:
        raise ValueError(f"n_theta must be >= 4, got {n_theta}")
    dth = np.pi / n_theta
    th_1d = (np.arange(n_theta) + 0.5) * dth
    s_th = np.sin(th_1d)
    s_th = 0.5 * (s_th + s_th[::-1])
    c_th = np.cos(th_1d)
    c_th = 0.5 * (c_th - c_th[::-1])
    nodes = np.stack([
        np.outer(s_th, cphi).ravel(),
        np.outer(s_th, sphi).ravel(),
        np.repeat(c_th, n_phi),
    ], axis=-1)
    # exact cell areas: (cos(theta - h/2) - cos(theta + h/2)) * dphi
    weights = np.repeat(2.0 * s_th * np.sin(0.5 * dth) * dphi, n_phi)
    rows = np.arange(n_theta)
    anti = ((n_theta - 1 - rows)[:, None] * n_phi + shift[None, :]).ravel()
    return SphereGrid(2, n_theta, n_phi, nodes, weights, anti,
                      np.repeat(th_1d, n_phi), np.tile(phi_1d, n_theta))


def _neighbour(grid, di, dj):
    """Flat index of node (i + di, j + dj) with the pole ghost rule, |di| <= 2."""
    N, M = grid.n_theta, grid.n_phi
    i = np.repeat(np.arange(N), M)
    j = np.tile(np.arange(M), N)
    ii, jj = i + di, j + dj
    over = (ii < 0) | (ii >= N)
    ii = np.where(ii < 0, -ii - 1, np.where(ii >= N, 2 * N - 1 - ii, ii))
    jj = np.where(over, jj + M // 2, jj) % M
    return ii * M + jj


def _stencil(grid, taps):
    size = grid.size
    rows, cols, vals = [], [], []
    for (di, dj), w in taps.items():
        rows.append(np.arange(size))
        if grid.n == 1:
            cols.append((np.arange(size) + dj) % size)
        else:
            cols.append(_neighbour(grid, di, dj))
        vals.append(np.full(size, w))
    mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(size, size))
    return mat.tocsr()


def theta_weights(h, fitted=True):
    """Weights (a, b) of a (v[+1] - v[-1]) + b (v[+2] - v[-2]) ~ dv/dtheta.

    a = -8 b cancels the h^2 error term; the fitted b makes the stencil exact
    on sin(theta) and cos(theta), the plain one is the textbook (8, -1) / 12h.
    """
    b = 0.5 / (np.sin(2 * h) - 8 * np.sin(h)) if fitted else -1.0 / (12 * h)
    return -8 * b, b


def coordinate_stencils(grid, fitted=True, fit_thetatheta=False):
    """Central differences in grid coordinates, keyed 'phi', 'phiphi', 'theta', ...

    ``fitted=False`` gives the textbook weights (2h, h^2, 12h);
    ``fit_thetatheta`` also fits the colatitude second difference.
    """
    dp = grid.dphi
    d1 = np.sin(dp) if fitted else dp
    d2 = 2.0 - 2.0 * np.cos(dp) if fitted else dp ** 2
    out = {
        "phi": _stencil(grid, {(0, 1): 0.5 / d1, (0, -1): -0.5 / d1}),
        "phiphi": _stencil(grid, {(0, 1): 1.0, (0, 0): -2.0, (0, -1): 1.0}) / d2,
    }
    if grid.n == 2:
        dt = grid.dtheta
        a, b = theta_weights(dt, fitted)
        wt = {1: a, -1: -a, 2: b, -2: -b}
        out["theta"] = _stencil(grid, {(di, 0): w for di, w in wt.items()})
        t2 = 2.0 - 2.0 * np.cos(dt) if fit_thetatheta else dt ** 2
        out["thetatheta"] = _stencil(grid, {(1, 0): 1.0, (0, 0): -2.0, (-1, 0): 1.0}) / t2
        out["thetaphi"] = _stencil(grid, {(di, dj): w * dj * 0.5 / d1
                                          for di, w in wt.items() for dj in (-1, 1)})
    return out


def _row_factors(grid):
    """sin(theta) and cot(theta) per node, built from the antipode-symmetric tables."""
    x = grid.nodes
    s = np.hypot(x[:, 0], x[:, 1])
    return s, x[:, 2] / s


def _frame_operators(grid):
    st = grid.stencils
    if grid.n == 1:
        return {("grad", 0): st["phi"], ("hess", 0, 0): st["phiphi"]}
    s, cot = _row_factors(grid)
    inv_s = sp.diags(1.0 / s)
    cot_d = sp.diags(cot)
    ops = {
        ("grad", 0): st["theta"],
        ("grad", 1): (inv_s @ st["phi"]).tocsr(),
        ("hess", 0, 0): st["thetatheta"],
        ("hess", 0, 1): (inv_s @ (st["thetaphi"] - cot_d @ st["phi"])).tocsr(),
        ("hess", 1, 1): (sp.diags(1.0 / s ** 2) @ st["phiphi"] + cot_d @ st["theta"]).tocsr(),
    }
    ops[("hess", 1, 0)] = ops[("hess", 0, 1)]
    return ops


def _difference_form(grid):
    if grid.n == 1:
        offsets = [(0, -1), (0, 1)]
        idx = np.arange(grid.size)
        nb = np.stack([(idx + dj) % grid.size for _, dj in offsets])
    else:
        offsets = [(di, dj) for di in range(-2, 3) for dj in (-1, 0, 1) if (di, dj) != (0, 0)]
        nb = np.stack([_neighbour(grid, di, dj) for di, dj in offsets])
    rows = np.broadcast_to(np.arange(grid.size), nb.shape)
    taps = {key: np.asarray(op[rows.ravel(), nb.ravel()]).reshape(nb.shape)
            for key, op in grid.operators.items()}
    return nb, taps


def derivatives(field):
    """Orthonormal-frame gradient and covariant Hessian of a scalar field.

    Every operator annihilates constants, so it is applied to the neighbour
    differences v[nb] - v rather than to v itself. Those differences are exact
    in floating point for smooth fields, which keeps the rounding error of the
    large pole-row weights proportional to the local variation of v instead
    of to |v|. In exact arithmetic the result equals ``grid.operators @ v``.
    """
    grid = field.grid
    nb, taps = grid.difference_form
    v = field.values
    diff = v[nb] - v
    n = grid.n
    grad = np.stack([np.sum(taps[("grad", a)] * diff, axis=0) for a in range(n)], axis=-1)
    hess = np.empty((grid.size, n, n))
    for a in range(n):
        for b in range(a, n):
            hess[:, a, b] = np.sum(taps[("hess", a, b)] * diff, axis=0)
            hess[:, b, a] = hess[:, a, b]
    return FrameDerivatives(grad, hess)


def laplacian(field):
    hess = derivatives(field).hess
    return ScalarField(field.grid, np.trace(hess, axis1=1, axis2=2))


def laplacian_operator(grid):
    ops = grid.operators
    return sum(ops[("hess", a, a)] for a in range(grid.n)).tocsr()


def even_project(field):
    v = field.values
    return ScalarField(field.grid, 0.5 * (v + v[field.grid.antipode_index]))


def integrate(field):
    return float(np.dot(field.values, field.grid.weights))


def to_ambient(grid, frame_components):
    """Convert per-node frame components (size, n) to ambient vectors (size, n + 1)."""
    return np.einsum("na,nad->nd", frame_components, grid.frame)
