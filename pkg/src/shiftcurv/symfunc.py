"""Elementary symmetric functions of eigenvalue vectors and small symmetric matrices.

Everything here is vectorised over leading axes: an eigenvalue argument has
shape ``(..., n)`` and a matrix argument ``(..., n, n)``, with ``n <= 3``.
"""

from math import comb

import numpy as np

from .errors import ConeViolationError

MAX_DIM = 3


def _check_k(k, n, lo=0):
    if not lo <= k <= n:
        raise ValueError(f"k={k} outside [{lo}, {n}]")


def _as_vector(lam):
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        lam = lam[None]
    n = lam.shape[-1]
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"eigenvalue vectors must have length 1..{MAX_DIM}, got {n}")
    return lam


def _as_matrix(A):
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected (..., n, n) array, got shape {A.shape}")
    if not 1 <= A.shape[-1] <= MAX_DIM:
        raise ValueError(f"matrix dimension must be 1..{MAX_DIM}")
    return A


def sigma(lam, k):
    """k-th elementary symmetric polynomial of the last axis of ``lam``."""
    lam = _as_vector(lam)
    n = lam.shape[-1]
    _check_k(k, n)
    # e[j] accumulates sigma_j of the entries seen so far
    e = [np.ones(lam.shape[:-1])] + [np.zeros(lam.shape[:-1]) for _ in range(k)]
    for i in range(n):
        li = lam[..., i]
        for j in range(k, 0, -1):
            e[j] = e[j] + li * e[j - 1]
    out = e[k]
    return float(out) if out.ndim == 0 else out


def _det(A):
    n = A.shape[-1]
    if n == 1:
        return A[..., 0, 0]
    if n == 2:
        return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    return (
        A[..., 0, 0] * (A[..., 1, 1] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 1])
        - A[..., 0, 1] * (A[..., 1, 0] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 0])
        + A[..., 0, 2] * (A[..., 1, 0] * A[..., 2, 1] - A[..., 1, 1] * A[..., 2, 0])
    )


def sigma_matrix(A, k):
    """sigma_k of the eigenvalues of ``A`` from closed-form invariants.

    Uses trace, determinant and (n = 3, k = 2) the half-difference of squared
    trace and trace of the square, so it is also valid for non-symmetric input.
    """
    A = _as_matrix(A)
    n = A.shape[-1]
    _check_k(k, n)
    if k == 0:
        out = np.ones(A.shape[:-2])
    elif k == 1:
        out = np.trace(A, axis1=-2, axis2=-1)
    elif k == n:
        out = _det(A)
    else:  # n == 3, k == 2
        tr = np.trace(A, axis1=-2, axis2=-1)
        tr2 = np.einsum("...ij,...ji->...", A, A)
        out = 0.5 * (tr * tr - tr2)
    return float(out) if np.ndim(out) == 0 else out


def eigvalsh_small(A):
    """Ascending eigenvalues of symmetric ``A`` (n <= 3) by closed formulas."""
    A = _as_matrix(A)
    n = A.shape[-1]
    if n == 1:
        return A[..., 0, :].copy()
    if n == 2:
        a, b, d = A[..., 0, 0], A[..., 0, 1], A[..., 1, 1]
        m = 0.5 * (a + d)
        r = np.hypot(0.5 * (a - d), b)
        return np.stack([m - r, m + r], axis=-1)
    # symmetric 3x3: trigonometric solution of the characteristic cubic
    q = np.trace(A, axis1=-2, axis2=-1) / 3.0
    off = A[..., 0, 1] ** 2 + A[..., 0, 2] ** 2 + A[..., 1, 2] ** 2
    diag = (A[..., 0, 0] - q) ** 2 + (A[..., 1, 1] - q) ** 2 + (A[..., 2, 2] - q) ** 2
    p = np.sqrt((diag + 2.0 * off) / 6.0)
    eye = np.eye(3)
    with np.errstate(invalid="ignore", divide="ignore"):
        B = (A - q[..., None, None] * eye) / p[..., None, None]
        r = np.clip(_det(B) / 2.0, -1.0, 1.0)
    r = np.where(p > 0, r, 0.0)
    ang = np.arccos(r) / 3.0
    top = q + 2.0 * p * np.cos(ang)
    bot = q + 2.0 * p * np.cos(ang + 2.0 * np.pi / 3.0)
    mid = 3.0 * q - top - bot
    return np.sort(np.stack([bot, mid, top], axis=-1), axis=-1)


def is_positive_definite(A):
    """Leading-minor (Sylvester) test, elementwise over leading axes."""
    A = _as_matrix(A)
    n = A.shape[-1]
    ok = A[..., 0, 0] > 0
    if n >= 2:
        ok &= _det(A[..., :2, :2]) > 0
    if n == 3:
        ok &= _det(A) > 0
    return ok


def sigma_gradient(A, k):
    """Matrix of partials d sigma_k / d A_ij, entries treated as independent.

    sigma_k^{ij} = sum_{m<k} (-1)^m sigma_{k-1-m}(A) (A^m)_{ji}.
    """
    A = _as_matrix(A)
    n = A.shape[-1]
    _check_k(k, n, lo=1)
    At = np.swapaxes(A, -1, -2)
    power = np.broadcast_to(np.eye(n), A.shape).copy()
    out = np.zeros_like(A)
    for m in range(k):
        coef = (-1) ** m * np.asarray(sigma_matrix(A, k - 1 - m))
        out += coef[..., None, None] * power
        power = power @ At
    return out


def quotient_F(A, n, k):
    """(sigma_n(A) / sigma_{n-k}(A))^(1/k) for positive definite ``A``."""
    A = _as_matrix(A)
    if A.shape[-1] != n:
        raise ValueError(f"matrix dimension {A.shape[-1]} != n={n}")
    _check_k(k, n, lo=1)
    lam = eigvalsh_small(A)
    lmin = lam[..., 0]
    if np.any(lmin <= 0):
        worst = float(np.min(lmin))
        raise ConeViolationError(f"matrix not positive definite (min eigenvalue {worst:.6g})",
                                 min_eig=worst)
    out = (sigma(lam, n) / sigma(lam, n - k)) ** (1.0 / k)
    return float(out) if np.ndim(out) == 0 else out


def in_garding_cone(lam, k):
    """True iff sigma_1, ..., sigma_k of ``lam`` are all positive."""
    lam = _as_vector(lam)
    _check_k(k, lam.shape[-1], lo=1)
    ok = np.ones(lam.shape[:-1], dtype=bool)
    for i in range(1, k + 1):
        ok &= np.asarray(sigma(lam, i)) > 0
    return bool(ok) if ok.ndim == 0 else ok


def _require_cone(lam, k):
    if not np.all(in_garding_cone(lam, k)):
        raise ConeViolationError(f"eigenvalues outside Garding cone Gamma_{k}")


def _normalised_ratio(lam, k, l):
    n = lam.shape[-1]
    num = np.asarray(sigma(lam, k)) / comb(n, k)
    den = np.asarray(sigma(lam, l)) / comb(n, l)
    return (num / den) ** (1.0 / (k - l))


def newton_maclaurin_gap(lam, k, l, r, s):
    """RHS minus LHS of the generalised Newton-Maclaurin inequality.

    Both sides are binomially normalised ratios (sigma_a/C(n,a)) / (sigma_b/C(n,b))
    raised to 1/(a-b); the result is non-negative on Gamma_k.
    """
    lam = _as_vector(lam)
    n = lam.shape[-1]
    if not (n >= k > l >= 0 and r > s >= 0 and k >= r and l >= s):
        raise ValueError(f"inadmissible indices k={k}, l={l}, r={r}, s={s} for n={n}")
    _require_cone(lam, k)
    out = _normalised_ratio(lam, r, s) - _normalised_ratio(lam, k, l)
    return float(out) if np.ndim(out) == 0 else out


def _sigma_without(lam, i, k):
    if k < 0:
        return np.zeros(lam.shape[:-1])
    rest = np.delete(lam, i, axis=-1)
    if rest.shape[-1] == 0:
        return np.ones(lam.shape[:-1]) if k == 0 else np.zeros(lam.shape[:-1])
    if k > rest.shape[-1]:
        return np.zeros(lam.shape[:-1])
    return np.asarray(sigma(rest, k))


def quotient_partials(lam, k, l):
    """Partials of (sigma_k/sigma_l)^(1/(k-l)) in each eigenvalue, shape (..., n)."""
    lam = _as_vector(lam)
    n = lam.shape[-1]
    p = k - l
    sk = np.asarray(sigma(lam, k))
    sl = np.asarray(sigma(lam, l))
    q = (sk / sl) ** (1.0 / p)
    cols = []
    for i in range(n):
        dk = _sigma_without(lam, i, k - 1) / sk
        dl = _sigma_without(lam, i, l - 1) / sl
        cols.append(q / p * (dk - dl))
    return np.stack(cols, axis=-1)


def sum_bound_gap(lam, k, l):
    """sum_i d/dlam_i (sigma_k/sigma_l)^(1/(k-l)) - (C(n,k)/C(n,l))^(1/(k-l))."""
    lam = _as_vector(lam)
    n = lam.shape[-1]
    if not n >= k > l >= 0:
        raise ValueError(f"need n >= k > l >= 0, got n={n}, k={k}, l={l}")
    _require_cone(lam, k)
    total = quotient_partials(lam, k, l).sum(axis=-1)
    out = total - (comb(n, k) / comb(n, l)) ** (1.0 / (k - l))
    return float(out) if np.ndim(out) == 0 else out
