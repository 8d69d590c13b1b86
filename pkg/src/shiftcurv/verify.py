"""Independent curvature oracle and monitor suite.

``measure_curvatures`` sees only the embedded points of a hypersurface: it
differentiates them with central differences in grid coordinates, builds
the induced metric and second fundamental form with Minkowski pairings, and
reads off principal curvatures. Nothing from A[phi] or the support-function
formula for W~ is reused, so agreement with the solver is a genuine check.

All stencil denominators here are fitted to sin/cos, the colatitude second
difference included, so the embedding of a geodesic sphere (whose coordinates
are degree-one harmonics) is differentiated exactly.
"""

from dataclasses import dataclass, field

import numpy as np

from . import horo, solver, sphere, symfunc
from .errors import GeometryError
from .horo import ShiftedCurvatures, minkowski

HYPERBOLOID_TOL = 1e-10


@dataclass(frozen=True)
class Monitor:
    name: str
    value: float
    passed: bool


@dataclass(frozen=True, eq=False)
class CurvatureReport:
    h_tilde_k_measured: np.ndarray
    h_tilde_k_prescribed: np.ndarray
    linf_rel_error: float
    l2_rel_error: float
    min_kappa_tilde: float
    monitors: list = field(default_factory=list)

    @property
    def passed(self):
        return all(m.passed for m in self.monitors)

    def failed(self):
        return [m.name for m in self.monitors if not m.passed]

    def to_dict(self):
        return {
            "linf_rel_error": self.linf_rel_error,
            "l2_rel_error": self.l2_rel_error,
            "min_kappa_tilde": self.min_kappa_tilde,
            "monitors": [{"name": m.name, "value": m.value, "pass": m.passed}
                         for m in self.monitors],
            "h_tilde_k_measured": self.h_tilde_k_measured.tolist(),
            "h_tilde_k_prescribed": self.h_tilde_k_prescribed.tolist(),
        }


def _lorentz(v):
    out = np.array(v, dtype=float, copy=True)
    out[..., -1] *= -1.0
    return out


def _null_vector(rows):
    """Euclidean vector orthogonal to the m rows of an (N, m, m + 1) stack (signed minors)."""
    m1 = rows.shape[-1]
    comps = []
    for i in range(m1):
        minor = np.delete(rows, i, axis=-1)
        comps.append((-1) ** i * np.linalg.det(minor))
    return np.stack(comps, axis=-1)


def _derivs(patch):
    st = sphere.coordinate_stencils(patch.grid, fitted=True, fit_thetatheta=True)
    X = patch.points
    if patch.grid.n == 1:
        return [st["phi"] @ X], [[st["phiphi"] @ X]]
    T = [st["theta"] @ X, st["phi"] @ X]
    Xtp = st["thetaphi"] @ X
    return T, [[st["thetatheta"] @ X, Xtp], [Xtp, st["phiphi"] @ X]]


def _interior_point(patch):
    c = patch.points.T @ patch.grid.weights
    return c / np.sqrt(-minkowski(c, c))


def fd_normals(patch, tangents=None):
    """Unit outward normals from finite-difference tangents alone."""
    X = patch.points
    T = tangents if tangents is not None else _derivs(patch)[0]
    rows = np.stack([_lorentz(X)] + [_lorentz(t) for t in T], axis=1)
    nu = _null_vector(rows)
    norm2 = minkowski(nu, nu)
    if np.any(norm2 <= 0):
        raise GeometryError("normal space is not spacelike; tangents degenerate")
    nu /= np.sqrt(norm2)[:, None]
    # outward: the body lies on the side where <nu, P> < 0 for interior P
    flip = minkowski(nu, _interior_point(patch)) > 0
    nu[flip] *= -1.0
    return nu


def measure_curvatures(patch, k):
    """Shifted principal curvatures of the embedded points, second-order accurate."""
    n = patch.grid.n
    T, XX = _derivs(patch)
    nu = fd_normals(patch, T)
    g = np.empty((patch.grid.size, n, n))
    hh = np.empty_like(g)
    for a in range(n):
        for b in range(n):
            g[:, a, b] = minkowski(T[a], T[b])
            hh[:, a, b] = -minkowski(XX[a][b], nu)
    if n == 1:
        if np.any(g[:, 0, 0] <= 0):
            raise GeometryError("degenerate induced metric")
        kappa = (hh[:, 0, 0] / g[:, 0, 0])[:, None]
    else:
        det_g = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] ** 2
        if np.any(det_g <= 0) or np.any(g[:, 0, 0] <= 0):
            raise GeometryError("degenerate induced metric")
        # shape operator g^-1 h via the symmetric similar matrix L^-1 h L^-T
        Linv = np.linalg.inv(np.linalg.cholesky(g))
        S = Linv @ hh @ np.swapaxes(Linv, -1, -2)
        S = 0.5 * (S + np.swapaxes(S, -1, -2))
        kappa = symfunc.eigvalsh_small(S)
    kt = kappa - 1.0
    with np.errstate(divide="ignore"):
        radii = 1.0 / kt
    return ShiftedCurvatures(kt, symfunc.sigma(kt, k), radii, k)


def compare(measured, spec, sf=None, patch=None):
    """Report of measured H~_k against f~, with monitors when phi/patch are given."""
    grid = spec.grid
    if measured.H_tilde_k.shape != (grid.size,) or measured.k != spec.k:
        raise ValueError("measured curvatures do not match the problem grid or k")
    for obj in (sf, patch):
        if obj is not None and obj.grid.shape != grid.shape:
            raise ValueError("support function / patch lives on a different grid")
    Hm = np.asarray(measured.H_tilde_k, dtype=float)
    ft = spec.f_tilde.values
    rel = np.abs(Hm - ft) / ft
    w = grid.weights
    l2 = float(np.sqrt(np.dot(w, (Hm - ft) ** 2) / np.dot(w, ft ** 2)))
    kmin = float(measured.kappa_tilde.min())
    slack = 10.0 * grid.h ** 2
    monitors = [Monitor("kappa_tilde_positive", kmin, kmin > 0)]
    if sf is not None:
        phi = sf.phi.values
        mid = solver.midpoint_check(sf)
        monitors.append(Monitor("midpoint", mid, mid >= -slack))
        lo, hi = solver.apriori_bounds(spec)
        margin = float(min(phi.min() - lo, hi - phi.max()))
        monitors.append(Monitor("apriori_bracket", margin, margin >= -slack))
        defect = float(np.max(np.abs(phi - phi[grid.antipode_index])))
        monitors.append(Monitor("evenness", defect, defect <= solver.EVEN_TOL))
    if patch is not None:
        hyp = float(np.max(np.abs(minkowski(patch.points, patch.points) + 1.0)))
        monitors.append(Monitor("hyperboloid_identity", hyp, hyp <= HYPERBOLOID_TOL))
    return CurvatureReport(Hm, ft.copy(), float(rel.max()), l2, kmin, monitors)


def weingarten_crosscheck(sf):
    """Max over nodes of the eigenvalue distance between (phi A)^-1 and measured W - I."""
    A = horo.build_A(sf)
    W = horo.shifted_weingarten(sf, A)
    from_support = symfunc.eigvalsh_small(W)
    measured = measure_curvatures(horo.embed(sf), 1).kappa_tilde
    return float(np.max(np.abs(from_support - measured)))


def verify_solution(spec, sf):
    """Embed, measure and compare in one call."""
    patch = horo.embed(sf)
    measured = measure_curvatures(patch, spec.k)
    return compare(measured, spec, sf=sf, patch=patch)
