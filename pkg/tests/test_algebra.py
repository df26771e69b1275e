import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matricvariate import algebra as alg
from matricvariate.algebra import DenseMatrix, DivisionScalar, HermitianPD
from matricvariate.errors import (DegenerateInputError, DimensionError, MatricvariateError,
                                  NotPositiveDefiniteError, UnsupportedAlgebraError)

# ---------------------------------------------------------------------------
# independent octonion table: quaternion pairs over a hand-written Hamilton table
# ---------------------------------------------------------------------------

# _QT[a][b] = (sign, index) of e_a e_b for basis (1, i, j, k)
_QT = [
    [(1, 0), (1, 1), (1, 2), (1, 3)],
    [(1, 1), (-1, 0), (1, 3), (-1, 2)],
    [(1, 2), (-1, 3), (-1, 0), (1, 1)],
    [(1, 3), (1, 2), (-1, 1), (-1, 0)],
]


def _qmul(p, q):
    out = np.zeros(4)
    for a in range(4):
        for b in range(4):
            s, c = _QT[a][b]
            out[c] += s * p[a] * q[b]
    return out


def _qconj(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def _omul(x, y):
    a, b, c, d = x[:4], x[4:], y[:4], y[4:]
    return np.concatenate([_qmul(a, c) - _qmul(_qconj(d), b), _qmul(d, a) + _qmul(b, _qconj(c))])


def _unit(beta, i):
    v = np.zeros(beta)
    v[i] = 1.0
    return DivisionScalar(beta, v)


def _rand_scalar(rng, beta):
    return DivisionScalar(beta, rng.standard_normal(beta))


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

def test_real_product():
    assert (DivisionScalar.real(1, 3.0) * DivisionScalar.real(1, -2.0)).coeffs == (-6.0,)


def test_quaternion_j_times_k_is_i():
    assert alg.mul_scalars(_unit(4, 2), _unit(4, 3)).coeffs == (0, 1, 0, 0)


def test_octonion_units_anticommute_with_unit_norm():
    e1, e2 = _unit(8, 1), _unit(8, 2)
    ab, ba = np.asarray((e1 * e2).coeffs), np.asarray((e2 * e1).coeffs)
    np.testing.assert_array_equal(ab, -ba)
    assert (e1 * e2).norm() == 1.0


def test_octonion_table_matches_independent_quaternion_pair_table():
    for a, b in itertools.product(range(8), repeat=2):
        got = (_unit(8, a) * _unit(8, b)).coeffs
        want = _omul(np.eye(8)[a], np.eye(8)[b])
        np.testing.assert_array_equal(got, want, err_msg=f"e{a} e{b}")


def test_octonion_imaginary_units_form_fano_plane():
    lines = set()
    for a, b in itertools.combinations(range(1, 8), 2):
        p = (_unit(8, a) * _unit(8, b)).coeffs
        (c,) = np.flatnonzero(p)
        assert c not in (0, a, b) and abs(p[c]) == 1
        lines.add(frozenset((a, b, c)))
    assert len(lines) == 7
    for a in range(1, 8):
        assert (_unit(8, a) * _unit(8, a)).coeffs == tuple([-1] + [0] * 7)
        assert sum(a in line for line in lines) == 3


@pytest.mark.parametrize("beta", alg.BETAS)
def test_normed_algebra_law(beta):
    rng = np.random.default_rng(beta)
    for _ in range(10_000):
        a, b = _rand_scalar(rng, beta), _rand_scalar(rng, beta)
        na, nb = a.norm(), b.norm()
        assert abs((a * b).norm() - na * nb) <= 1e-12 * na * nb


def test_octonions_alternative_but_not_associative():
    rng = np.random.default_rng(0)
    nonassoc = 0.0
    for _ in range(200):
        a, b, c = (_rand_scalar(rng, 8) for _ in range(3))
        scale = a.norm() ** 2 * b.norm() + a.norm() * b.norm() ** 2
        np.testing.assert_allclose(((a * a) * b).coeffs, (a * (a * b)).coeffs, atol=1e-12 * scale)
        np.testing.assert_allclose(((a * b) * b).coeffs, (a * (b * b)).coeffs, atol=1e-12 * scale)
        nonassoc = max(nonassoc, np.abs(np.subtract(((a * b) * c).coeffs, (a * (b * c)).coeffs)).max())
    assert nonassoc > 1e-3


@pytest.mark.parametrize("beta", alg.MATRIX_BETAS)
def test_associative_up_to_quaternions(beta):
    rng = np.random.default_rng(1)
    for _ in range(200):
        a, b, c = (_rand_scalar(rng, beta) for _ in range(3))
        np.testing.assert_allclose(((a * b) * c).coeffs, (a * (b * c)).coeffs, atol=1e-12)


def test_scalar_beta_mismatch():
    with pytest.raises(DimensionError):
        alg.mul_scalars(_unit(2, 1), _unit(4, 1))


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

def _mat(beta, rows):
    """Build a matrix from nested lists of coefficient tuples (or reals)."""
    arr = np.array(rows, dtype=float)
    if arr.ndim == 2:
        arr = arr[..., None] * np.eye(1, beta)[0]
    return DenseMatrix(beta, arr)


def _rand_matrix(rng, beta, m, n):
    return DenseMatrix(beta, rng.standard_normal((m, n, beta)))


def test_identity_times_a():
    rng = np.random.default_rng(2)
    A = _rand_matrix(rng, 4, 2, 3)
    np.testing.assert_allclose((DenseMatrix.identity(4, 2) @ A).coeffs, A.coeffs, atol=1e-15)


def test_small_products():
    i2 = _mat(2, [[(0, 1)]])
    assert (i2 @ i2).coeffs.tolist() == [[[-1, 0]]]
    j4, k4 = _mat(4, [[(0, 0, 1, 0)]]), _mat(4, [[(0, 0, 0, 1)]])
    np.testing.assert_allclose((j4 @ k4).coeffs, [[[0, 1, 0, 0]]], atol=1e-15)


def test_matmul_errors():
    rng = np.random.default_rng(3)
    with pytest.raises(DimensionError):
        _rand_matrix(rng, 1, 2, 3) @ _rand_matrix(rng, 1, 2, 3)
    octo = DenseMatrix(8, np.zeros((1, 1, 8)))  # storable, but no arithmetic
    for op in (lambda: octo @ octo, lambda: alg.gram(octo), lambda: alg.complex_embed(octo),
               lambda: alg.svd(octo)):
        with pytest.raises(UnsupportedAlgebraError):
            op()


def test_adjoint_examples():
    A = _mat(1, [[1, 2, 3], [4, 5, 6]])
    np.testing.assert_array_equal(A.H.coeffs[..., 0], [[1, 4], [2, 5], [3, 6]])
    assert _mat(2, [[(0, 1)]]).H.coeffs.tolist() == [[[0, -1]]]
    col = _mat(4, [[(1, 0, 1, 0)], [(0, 0, 0, 1)]])
    np.testing.assert_array_equal(col.H.coeffs, [[[1, 0, -1, 0], [0, 0, 0, -1]]])


def test_gram_examples():
    np.testing.assert_array_equal(alg.gram(DenseMatrix.identity(2, 2)).coeffs,
                                  DenseMatrix.identity(2, 2).coeffs)
    np.testing.assert_allclose(alg.gram(_mat(1, [[1, 2], [0, 1]])).coeffs[..., 0], [[5, 2], [2, 1]])
    np.testing.assert_allclose(alg.gram(_mat(2, [[(1, 0), (0, 1)]])).coeffs, [[[2, 0]]])


def test_cholesky_examples():
    L = alg.cholesky(HermitianPD(1, [[[4], [2]], [[2], [3]]]))
    np.testing.assert_allclose(L.coeffs[..., 0], [[2, 0], [1, math.sqrt(2)]], atol=1e-15)
    np.testing.assert_allclose(alg.cholesky(HermitianPD(4, [[[9, 0, 0, 0]]])).coeffs,
                               [[[3, 0, 0, 0]]])
    np.testing.assert_allclose(alg.cholesky(HermitianPD.identity(2, 3)).coeffs,
                               DenseMatrix.identity(2, 3).coeffs)


def test_cholesky_rejects_non_pd():
    with pytest.raises(NotPositiveDefiniteError):
        alg.cholesky(HermitianPD(1, [[[1], [2]], [[2], [1]]]))


@pytest.mark.parametrize("beta", alg.MATRIX_BETAS)
def test_cholesky_factor_reproduces_matrix(beta):
    rng = np.random.default_rng(4)
    H = alg.gram(_rand_matrix(rng, beta, 3, 5))
    L = alg.cholesky(H)
    np.testing.assert_allclose((L @ L.H).coeffs, H.coeffs, atol=1e-12)
    assert np.all(L.coeffs[np.arange(3), np.arange(3), 1:] == 0)
    assert np.all(np.triu(np.ones((3, 3)), 1)[..., None] * L.coeffs == 0)


def test_eigenvalue_examples():
    np.testing.assert_allclose(alg.herm_eigenvalues(HermitianPD(1, [[[3], [0]], [[0], [1]]])),
                               [3, 1])
    H2 = HermitianPD(2, [[(2, 0), (0, 1)], [(0, -1), (2, 0)]])
    np.testing.assert_allclose(alg.herm_eigenvalues(H2), [3, 1], atol=1e-14)
    H4 = HermitianPD(4, [[(2, 0, 0, 0), (0, 0, 1, 0)], [(0, 0, -1, 0), (2, 0, 0, 0)]])
    np.testing.assert_allclose(alg.herm_eigenvalues(H4), [3, 1], atol=1e-14)


def test_logdet_examples():
    assert alg.logdet_hpd(HermitianPD.identity(4, 3)) == pytest.approx(0, abs=1e-15)
    H2 = HermitianPD(2, [[(2, 0), (0, 1)], [(0, -1), (2, 0)]])
    assert alg.logdet_hpd(H2) == pytest.approx(math.log(3), abs=1e-14)
    assert alg.logdet_hpd(HermitianPD(1, [[[4], [2]], [[2], [3]]])) == pytest.approx(math.log(8))


def test_svd_examples():
    res = alg.svd(_mat(1, [[2, 0], [0, 1]]))
    np.testing.assert_allclose(res.singulars, [2, 1])
    np.testing.assert_allclose(alg.svd(_mat(2, [[(0, 2)]])).singulars, [2])


@pytest.mark.parametrize("beta", alg.MATRIX_BETAS)
def test_svd_reconstruction_and_eig_consistency(beta):
    rng = np.random.default_rng(5)
    for _ in range(20):
        X = _rand_matrix(rng, beta, 2, 3)
        res = alg.svd(X)
        resid = np.abs(res.reconstruct().coeffs - X.coeffs).max()
        assert resid < 1e-10 * np.abs(X.coeffs).max()
        assert np.all(np.diff(res.singulars) < 0) and np.all(res.singulars > 0)
        np.testing.assert_allclose(res.singulars ** 2, alg.herm_eigenvalues(alg.gram(X)),
                                   rtol=1e-9)


def test_svd_rank_deficient():
    with pytest.raises(DegenerateInputError):
        alg.svd(_mat(1, [[1, 2, 3], [2, 4, 6]]))


def test_embedding_examples():
    np.testing.assert_array_equal(alg.complex_embed(DenseMatrix(4, [[[1, 0, 0, 0]]])), np.eye(2))
    np.testing.assert_array_equal(alg.complex_embed(DenseMatrix(4, [[[0, 0, 1, 0]]])),
                                  [[0, 1], [-1, 0]])
    z = DenseMatrix(2, [[[0.5, -1.5]]])
    assert alg.complex_embed(z).tolist() == [[0.5 - 1.5j]]


def test_quaternion_embedding_is_homomorphism_on_basis():
    for a, b in itertools.product(range(4), repeat=2):
        ea, eb = DenseMatrix(4, [[np.eye(4)[a]]]), DenseMatrix(4, [[np.eye(4)[b]]])
        prod = DenseMatrix(4, [[(_unit(4, a) * _unit(4, b)).coeffs]])
        np.testing.assert_array_equal(alg.complex_embed(ea) @ alg.complex_embed(eb),
                                      alg.complex_embed(prod))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_quaternion_matmul_matches_embedded_product(m, k, n, seed):
    rng = np.random.default_rng(seed)
    A, B = _rand_matrix(rng, 4, m, k), _rand_matrix(rng, 4, k, n)
    np.testing.assert_allclose(alg.complex_embed(A @ B),
                               alg.complex_embed(A) @ alg.complex_embed(B), atol=1e-12)
    back = alg.complex_unembed(alg.complex_embed(A), 4)
    np.testing.assert_array_equal(back.coeffs, A.coeffs)


@pytest.mark.parametrize("beta", alg.MATRIX_BETAS)
def test_cholesky_gram_logdet_round_trip(beta):
    rng = np.random.default_rng(6)
    for _ in range(20):
        H = alg.gram(_rand_matrix(rng, beta, 3, 4))
        diag = alg.cholesky(H).coeffs[np.arange(3), np.arange(3), 0]
        assert alg.logdet_hpd(H) == pytest.approx(2 * np.sum(np.log(diag)), abs=1e-9)


def test_quaternion_trace_and_logdet_compatibility():
    rng = np.random.default_rng(7)
    for _ in range(20):
        H = alg.gram(_rand_matrix(rng, 4, 3, 5))
        E = alg.complex_embed(H)
        assert np.real(np.trace(E)) == pytest.approx(2 * np.sum(H.coeffs[np.arange(3), np.arange(3), 0]))
        assert np.linalg.slogdet(E)[1] == pytest.approx(2 * alg.logdet_hpd(H), abs=1e-9)


def test_hermitian_storage_and_immutability():
    H = HermitianPD(2, [[(2, 0.7), (9, 9)], [(1, -1), (3, 0.2)]])
    assert H.entry(0, 1).coeffs == (1, 1)  # upper triangle rebuilt from lower
    assert H.entry(0, 0).coeffs == (2, 0)  # diagonal forced real
    with pytest.raises((AttributeError, TypeError)):
        H.coeffs = np.zeros((2, 2, 2))
    with pytest.raises(ValueError):
        H.coeffs[0, 0, 0] = 1.0


def test_json_round_trip():
    rng = np.random.default_rng(8)
    A = _rand_matrix(rng, 4, 2, 3)
    assert DenseMatrix.from_json(A.to_json()) == A
    with pytest.raises(MatricvariateError):
        DenseMatrix.from_json({"beta": 4, "m": 3, "n": 3, "entries": A.coeffs.tolist()})
