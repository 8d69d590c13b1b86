from itertools import combinations
from math import comb, prod

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shiftcurv import symfunc
from shiftcurv.errors import ConeViolationError


def sigma_bruteforce(lam, k):
    """Sum over increasing index tuples, straight from the definition."""
    return sum(prod(c) for c in combinations(lam, k)) if k else 1.0


def sigma_charpoly(A, k):
    """(-1)^k times the coefficient of t^(n-k) in det(tI - A)."""
    return (-1) ** k * np.poly(A)[k]


def random_rotation(rng, n):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


# -- examples -----------------------------------------------------------------

def test_sigma_examples():
    assert symfunc.sigma([1, 2, 3], 2) == 11
    t = 1.7
    assert symfunc.sigma([t, t, t], 3) == pytest.approx(t ** 3, rel=1e-15)
    assert symfunc.sigma([5, -1], 0) == 1


def test_sigma_rejects_bad_k():
    with pytest.raises(ValueError):
        symfunc.sigma([1, 2], 3)
    with pytest.raises(ValueError):
        symfunc.sigma([1, 2], -1)
    with pytest.raises(ValueError):
        symfunc.sigma_matrix(np.eye(2), 3)


def test_sigma_matrix_examples():
    assert symfunc.sigma_matrix(np.eye(2), 2) == 1
    assert symfunc.sigma_matrix(np.diag([2.0, 7.0]), 1) == 9
    assert symfunc.sigma_matrix([[2, 1], [1, 2]], 2) == pytest.approx(3, abs=1e-15)


def test_sigma_gradient_examples():
    A = np.array([[3.0, 0.4], [0.4, -1.0]])
    np.testing.assert_array_equal(symfunc.sigma_gradient(A, 1), np.eye(2))
    np.testing.assert_allclose(symfunc.sigma_gradient(np.diag([2.0, 5.0]), 2), np.diag([5.0, 2.0]))
    np.testing.assert_allclose(symfunc.sigma_gradient([[2, 1], [1, 2]], 2), [[2, -1], [-1, 2]])


def test_quotient_F_examples():
    t = 2.3
    assert symfunc.quotient_F(t * np.eye(2), 2, 1) == pytest.approx(t / 2)
    assert symfunc.quotient_F(t * np.eye(2), 2, 2) == pytest.approx(t)
    assert symfunc.quotient_F(np.diag([1.0, 4.0]), 2, 1) == pytest.approx(0.8)


def test_quotient_F_cone_violation_carries_eigenvalue():
    with pytest.raises(ConeViolationError) as info:
        symfunc.quotient_F(np.diag([2.0, -0.5]), 2, 1)
    assert info.value.min_eig == pytest.approx(-0.5)


def test_in_garding_cone_examples():
    assert symfunc.in_garding_cone([1, 1, 1], 3)
    assert not symfunc.in_garding_cone([-1, -1], 1)
    assert symfunc.in_garding_cone([3, 3, -1], 2)
    assert not symfunc.in_garding_cone([3, 3, -1], 3)


def test_newton_maclaurin_examples():
    for lam in ([2.0, 2.0, 2.0], [0.3, 0.3]):
        n = len(lam)
        for k in range(1, n + 1):
            for l in range(k):
                assert symfunc.newton_maclaurin_gap(lam, k, l, 1, 0) == pytest.approx(0, abs=1e-14)
    assert symfunc.newton_maclaurin_gap([1, 2, 3], 2, 0, 1, 0) == pytest.approx(2 - np.sqrt(11 / 3))
    assert symfunc.newton_maclaurin_gap([1, 1, 4], 3, 0, 1, 0) == pytest.approx(2 - 4 ** (1 / 3))


def test_newton_maclaurin_errors():
    with pytest.raises(ConeViolationError):
        symfunc.newton_maclaurin_gap([1, -3, 1], 2, 0, 1, 0)
    with pytest.raises(ValueError):
        symfunc.newton_maclaurin_gap([1, 2, 3], 2, 0, 3, 0)  # r > k


def test_sum_bound_examples():
    assert symfunc.sum_bound_gap([1, 1], 1, 0) == pytest.approx(0, abs=1e-15)
    assert symfunc.sum_bound_gap([1, 1], 2, 0) == pytest.approx(0, abs=1e-15)
    assert symfunc.sum_bound_gap([1, 4], 2, 0) == pytest.approx(0.25)
    with pytest.raises(ConeViolationError):
        symfunc.sum_bound_gap([1, -4], 2, 0)


def test_eigvalsh_small_matches_lapack():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3):
        M = rng.normal(size=(500, n, n))
        S = M + np.swapaxes(M, 1, 2)
        np.testing.assert_allclose(symfunc.eigvalsh_small(S), np.linalg.eigvalsh(S), atol=1e-12)
    # repeated eigenvalues
    np.testing.assert_allclose(symfunc.eigvalsh_small(2.0 * np.eye(3)[None]), [[2, 2, 2]])


def test_is_positive_definite():
    assert symfunc.is_positive_definite(np.eye(3))
    assert not symfunc.is_positive_definite(np.diag([1.0, -1e-9]))
    assert not symfunc.is_positive_definite([[1.0, 2.0], [2.0, 1.0]])


# -- properties ---------------------------------------------------------------

@given(arrays(float, st.integers(1, 3), elements=finite), st.data())
def test_sigma_matches_definition(lam, data):
    k = data.draw(st.integers(0, len(lam)))
    scale = max(1.0, np.max(np.abs(lam))) ** k
    assert symfunc.sigma(lam, k) == pytest.approx(sigma_bruteforce(lam, k), abs=1e-12 * scale)


@given(arrays(float, (3, 3), elements=finite), st.integers(0, 3))
def test_sigma_matrix_matches_characteristic_polynomial(M, k):
    A = M + M.T
    ref = sigma_charpoly(A, k)
    scale = max(1.0, np.max(np.abs(A))) ** k
    assert symfunc.sigma_matrix(A, k) == pytest.approx(ref, abs=1e-10 * scale)
    lam = np.linalg.eigvalsh(A)
    assert symfunc.sigma(lam, k) == pytest.approx(ref, abs=1e-10 * scale)


def test_sigma_orthogonal_invariance():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = rng.integers(1, 4)
        M = rng.normal(size=(n, n))
        A = M + M.T
        Q = random_rotation(rng, n)
        B = Q @ A @ Q.T
        for k in range(n + 1):
            assert abs(symfunc.sigma_matrix(A, k) - symfunc.sigma_matrix(B, k)) <= 1e-12 * max(
                1.0, abs(symfunc.sigma_matrix(A, k)))


def test_sigma_gradient_finite_differences():
    rng = np.random.default_rng(3)
    h = 1e-6
    for _ in range(100):
        n = rng.integers(1, 4)
        M = rng.normal(size=(n, n))
        A = M + M.T
        for k in range(1, n + 1):
            G = symfunc.sigma_gradient(A, k)
            fd = np.empty((n, n))
            for i in range(n):
                for j in range(n):
                    E = np.zeros((n, n))
                    E[i, j] = h
                    fd[i, j] = (symfunc.sigma_matrix(A + E, k) - symfunc.sigma_matrix(A - E, k)) / (2 * h)
            np.testing.assert_allclose(G, fd, rtol=1e-6, atol=1e-6 * max(1.0, np.abs(G).max()))


def test_sigma_gradient_is_symmetric_for_symmetric_input():
    rng = np.random.default_rng(4)
    M = rng.normal(size=(50, 3, 3))
    A = M + np.swapaxes(M, 1, 2)
    for k in (1, 2, 3):
        G = symfunc.sigma_gradient(A, k)
        np.testing.assert_allclose(G, np.swapaxes(G, 1, 2), atol=1e-13)


@settings(max_examples=200)
@given(arrays(float, st.integers(1, 3), elements=st.floats(0.05, 20)), st.data())
def test_newton_maclaurin_on_positive_cone(lam, data):
    n = len(lam)
    k = data.draw(st.integers(1, n))
    l = data.draw(st.integers(0, k - 1))
    s = data.draw(st.integers(0, l))
    r = data.draw(st.integers(s + 1, k))
    assert symfunc.newton_maclaurin_gap(lam, k, l, r, s) >= -1e-12


@settings(max_examples=200)
@given(arrays(float, st.integers(1, 3), elements=st.floats(0.05, 20)), st.data())
def test_sum_bound_on_positive_cone(lam, data):
    n = len(lam)
    k = data.draw(st.integers(1, n))
    l = data.draw(st.integers(0, k - 1))
    assert symfunc.sum_bound_gap(lam, k, l) >= -1e-10


def test_quotient_partials_finite_differences():
    rng = np.random.default_rng(5)
    h = 1e-6
    for _ in range(100):
        n = rng.integers(1, 4)
        lam = rng.uniform(0.1, 5.0, n)
        k = rng.integers(1, n + 1)
        l = rng.integers(0, k)
        q = lambda v: (symfunc.sigma(v, k) / symfunc.sigma(v, l)) ** (1.0 / (k - l))
        fd = [(q(lam + h * e) - q(lam - h * e)) / (2 * h) for e in np.eye(n)]
        np.testing.assert_allclose(symfunc.quotient_partials(lam, k, l), fd, rtol=1e-6, atol=1e-9)


def test_quotient_F_monotone_in_each_eigenvalue():
    rng = np.random.default_rng(6)
    for _ in range(300):
        n = rng.integers(1, 4)
        k = rng.integers(1, n + 1)
        lam = rng.uniform(0.05, 5.0, n)
        Q = random_rotation(rng, n)
        bumped = lam.copy()
        bumped[rng.integers(n)] += rng.uniform(1e-3, 1.0)
        before = symfunc.quotient_F(Q @ np.diag(lam) @ Q.T, n, k)
        after = symfunc.quotient_F(Q @ np.diag(bumped) @ Q.T, n, k)
        assert after > before


def test_quotient_F_concave_on_secants():
    rng = np.random.default_rng(7)
    for _ in range(300):
        n = rng.integers(1, 4)
        k = rng.integers(1, n + 1)
        mats = [random_rotation(rng, n) @ np.diag(rng.uniform(0.01, 10, n)) for _ in range(2)]
        A, B = (M @ M.T for M in mats)
        t = rng.uniform()
        lhs = symfunc.quotient_F(t * A + (1 - t) * B, n, k)
        rhs = t * symfunc.quotient_F(A, n, k) + (1 - t) * symfunc.quotient_F(B, n, k)
        assert lhs >= rhs - 1e-10


def test_binomial_normalisation_equality_case():
    # on lam = t(1,...,1) every normalised ratio equals t
    t = 1.9
    for n in (1, 2, 3):
        lam = np.full(n, t)
        for k in range(1, n + 1):
            assert symfunc.sigma(lam, k) == pytest.approx(comb(n, k) * t ** k)
