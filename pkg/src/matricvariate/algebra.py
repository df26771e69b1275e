"""Scalars and dense matrices over the real normed division algebras.

Elements are stored as real coefficient vectors of length ``beta`` in the
Cayley-Dickson basis order ``(1, i, j, k, e4, ..., e7)`` with ``ij = k``.
A matrix over the algebra is a real array of shape ``(m, n, beta)``; the
functions in this module that take raw arrays also accept leading batch
axes, ``(..., m, n, beta)``.

Matrix factorizations go through the complex embedding.  A quaternion is
written ``q = z1 + z2 j`` with ``z1 = a + b i`` and ``z2 = c + d i``; it maps
to the 2x2 complex block ``[[z1, z2], [-conj(z2), conj(z1)]]``.  Matrices
are embedded block-by-block (interleaved layout), so that lower-triangular
quaternion matrices with real diagonal embed to lower-triangular complex
matrices and the complex Cholesky factor of an embedded matrix is itself an
embedding.

Octonions (beta = 8) are supported for scalar arithmetic only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ConsistencyError,
    DegenerateInputError,
    DimensionError,
    NotPositiveDefiniteError,
    ParameterError,
    UnsupportedAlgebraError,
)

__all__ = [
    "BETAS",
    "MATRIX_BETAS",
    "DivisionScalar",
    "DenseMatrix",
    "HermitianPD",
    "SVDResult",
    "mul_scalars",
    "matmul",
    "adjoint",
    "gram",
    "cholesky",
    "herm_eigenvalues",
    "logdet_hpd",
    "svd",
    "complex_embed",
    "complex_unembed",
    "embed",
    "unembed",
    "hermitian_part",
    "embedded_eigvalsh",
    "is_pd",
]

BETAS = (1, 2, 4, 8)
MATRIX_BETAS = (1, 2, 4)

# relative tolerances shared with the density evaluators
PD_RTOL = 1e-12
PAIR_RTOL = 1e-8
TIE_RTOL = 1e-12


def check_beta(beta, matrix: bool = False) -> int:
    if beta not in BETAS:
        raise ParameterError(f"beta must be one of {BETAS}, got {beta!r}")
    beta = int(beta)
    if matrix and beta == 8:
        raise UnsupportedAlgebraError(
            "octonion (beta=8) matrix arithmetic is unsupported; "
            "only scalar octonion operations are available"
        )
    return beta


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

def _cd_conj(x: np.ndarray) -> np.ndarray:
    out = -x
    out[..., 0] = x[..., 0]
    return out


def _cd_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cayley-Dickson product ``(a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))``."""
    k = x.shape[-1]
    if k == 1:
        return x * y
    h = k // 2
    a, b = x[..., :h], x[..., h:]
    c, d = y[..., :h], y[..., h:]
    return np.concatenate(
        [_cd_mul(a, c) - _cd_mul(_cd_conj(d), b), _cd_mul(d, a) + _cd_mul(b, _cd_conj(c))],
        axis=-1,
    )


@dataclass(frozen=True)
class DivisionScalar:
    """An element of R, C, H or O as a coefficient tuple of length ``beta``."""

    beta: int
    coeffs: tuple

    def __post_init__(self):
        check_beta(self.beta)
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) != self.beta:
            raise DimensionError(
                f"beta={self.beta} scalar needs {self.beta} coefficients, got {len(coeffs)}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def real(cls, beta: int, value: float) -> "DivisionScalar":
        return cls(beta, (value,) + (0.0,) * (beta - 1))

    @classmethod
    def unit(cls, beta: int, index: int) -> "DivisionScalar":
        """Basis element ``e_index`` (``e_0 = 1``)."""
        c = [0.0] * beta
        c[index] = 1.0
        return cls(beta, tuple(c))

    def conj(self) -> "DivisionScalar":
        return DivisionScalar(self.beta, tuple(_cd_conj(np.array(self.coeffs))))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __mul__(self, other: "DivisionScalar") -> "DivisionScalar":
        return mul_scalars(self, other)

    def __add__(self, other: "DivisionScalar") -> "DivisionScalar":
        if self.beta != other.beta:
            raise DimensionError("cannot add scalars over different algebras")
        return DivisionScalar(self.beta, tuple(np.add(self.coeffs, other.coeffs)))

    def __neg__(self) -> "DivisionScalar":
        return DivisionScalar(self.beta, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "DivisionScalar") -> "DivisionScalar":
        return self + (-other)


def mul_scalars(a: DivisionScalar, b: DivisionScalar) -> DivisionScalar:
    if a.beta != b.beta:
        raise DimensionError(f"scalar beta mismatch: {a.beta} vs {b.beta}")
    return DivisionScalar(a.beta, tuple(_cd_mul(np.array(a.coeffs), np.array(b.coeffs))))


# ---------------------------------------------------------------------------
# complex embedding on raw coefficient arrays
# ---------------------------------------------------------------------------

def embed(coeffs: np.ndarray, beta: int) -> np.ndarray:
    """Embed coefficient arrays ``(..., m, n, beta)`` as real/complex matrices.

    Returns shape ``(..., m, n)`` (float for beta=1, complex for beta=2) or
    ``(..., 2m, 2n)`` complex for beta=4.
    """
    beta = check_beta(beta, matrix=True)
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != beta:
        raise DimensionError(f"last axis must have length beta={beta}, got {coeffs.shape}")
    if beta == 1:
        return coeffs[..., 0].copy()
    if beta == 2:
        return coeffs[..., 0] + 1j * coeffs[..., 1]
    z1 = coeffs[..., 0] + 1j * coeffs[..., 1]
    z2 = coeffs[..., 2] + 1j * coeffs[..., 3]
    *lead, m, n = z1.shape
    out = np.empty((*lead, 2 * m, 2 * n), dtype=complex)
    out[..., 0::2, 0::2] = z1
    out[..., 0::2, 1::2] = z2
    out[..., 1::2, 0::2] = -z2.conj()
    out[..., 1::2, 1::2] = z1.conj()
    return out


def unembed(E: np.ndarray, beta: int) -> np.ndarray:
    """Inverse of :func:`embed`; quaternion blocks are projected onto the
    embedding's image (averaging the redundant entries)."""
    beta = check_beta(beta, matrix=True)
    E = np.asarray(E)
    if beta == 1:
        return np.real(E)[..., None].astype(float)
    if beta == 2:
        E = E.astype(complex)
        return np.stack([E.real, E.imag], axis=-1)
    if E.shape[-1] % 2 or E.shape[-2] % 2:
        raise DimensionError(f"quaternion embedding needs even dimensions, got {E.shape}")
    z1 = 0.5 * (E[..., 0::2, 0::2] + E[..., 1::2, 1::2].conj())
    z2 = 0.5 * (E[..., 0::2, 1::2] - E[..., 1::2, 0::2].conj())
    return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)


def _ct(E: np.ndarray) -> np.ndarray:
    return np.swapaxes(E, -1, -2).conj()


def hermitian_part(E: np.ndarray) -> np.ndarray:
    return 0.5 * (E + _ct(E))


def embedded_eigvalsh(E: np.ndarray, beta: int) -> np.ndarray:
    """Eigenvalues (descending, one per algebra dimension) of embedded
    Hermitian matrices; quaternion pairs are checked and deduplicated."""
    w = np.linalg.eigvalsh(hermitian_part(E))[..., ::-1]
    if beta != 4:
        return w
    first, second = w[..., 0::2], w[..., 1::2]
    scale = np.maximum(np.abs(w).max(axis=-1, keepdims=True), np.finfo(float).tiny)
    if np.any(np.abs(first - second) > PAIR_RTOL * scale):
        raise ConsistencyError("quaternion embedding eigenvalues are not paired")
    return 0.5 * (first + second)


def is_pd(E: np.ndarray, beta: int) -> np.ndarray:
    """Batched PD test on embedded Hermitian matrices: ``min eig > 1e-12 max eig``."""
    w = np.linalg.eigvalsh(hermitian_part(E))
    return (w[..., 0] > PD_RTOL * w[..., -1]) & (w[..., -1] > 0)


# ---------------------------------------------------------------------------
# dense matrices
# ---------------------------------------------------------------------------

class DenseMatrix:
    """An immutable m x n matrix over the algebra of dimension ``beta``."""

    __slots__ = ("beta", "coeffs")

    def __init__(self, beta: int, coeffs):
        beta = check_beta(beta)
        arr = np.array(coeffs, dtype=float)
        if arr.ndim == 2 and beta == 1:
            arr = arr[..., None]
        if arr.ndim != 3 or arr.shape[-1] != beta:
            raise DimensionError(
                f"expected coefficient array of shape (m, n, {beta}), got {arr.shape}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"matrix dimensions must be >= 1, got {arr.shape[:2]}")
        arr.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[:2]

    def __repr__(self):
        return f"{type(self).__name__}(beta={self.beta}, shape={self.shape})"

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.beta == other.beta and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def entry(self, i: int, j: int) -> DivisionScalar:
        return DivisionScalar(self.beta, tuple(self.coeffs[i, j]))

    # constructors
    @classmethod
    def from_embedded(cls, beta: int, E: np.ndarray) -> "DenseMatrix":
        return cls(beta, unembed(E, beta))

    @classmethod
    def identity(cls, beta: int, m: int) -> "DenseMatrix":
        c = np.zeros((m, m, beta))
        c[np.arange(m), np.arange(m), 0] = 1.0
        return cls(beta, c)

    @classmethod
    def zeros(cls, beta: int, m: int, n: int) -> "DenseMatrix":
        return cls(beta, np.zeros((m, n, beta)))

    @classmethod
    def from_scalars(cls, rows: Sequence[Sequence[DivisionScalar]]) -> "DenseMatrix":
        beta = rows[0][0].beta
        return cls(beta, [[s.coeffs for s in row] for row in rows])

    # interchange format
    def to_json(self) -> dict:
        return {"beta": self.beta, "m": self.m, "n": self.n, "entries": self.coeffs.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "DenseMatrix":
        try:
            beta, m, n, entries = obj["beta"], obj["m"], obj["n"], obj["entries"]
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"matrix JSON needs beta, m, n, entries: {exc}") from None
        mat = cls(beta, entries)
        if mat.shape != (m, n):
            raise DimensionError(f"entries shape {mat.shape} does not match m={m}, n={n}")
        return mat

    # algebra
    def embedded(self) -> np.ndarray:
        return complex_embed(self)

    def __matmul__(self, other: "DenseMatrix") -> "DenseMatrix":
        return matmul(self, other)

    def __add__(self, other: "DenseMatrix") -> "DenseMatrix":
        if self.beta != other.beta or self.shape != other.shape:
            raise DimensionError("cannot add matrices of different algebra or shape")
        return DenseMatrix(self.beta, self.coeffs + other.coeffs)

    def __sub__(self, other: "DenseMatrix") -> "DenseMatrix":
        if self.beta != other.beta or self.shape != other.shape:
            raise DimensionError("cannot subtract matrices of different algebra or shape")
        return DenseMatrix(self.beta, self.coeffs - other.coeffs)

    @property
    def H(self) -> "DenseMatrix":
        return adjoint(self)


def _hermitian_from_lower(coeffs: np.ndarray) -> np.ndarray:
    """Rebuild an exactly Hermitian coefficient array from its lower triangle."""
    m = coeffs.shape[-3]
    out = np.array(coeffs, dtype=float, copy=True)
    il = np.tril_indices(m, -1)
    conj_lower = _cd_conj(out[..., il[0], il[1], :])
    out[..., il[1], il[0], :] = conj_lower
    d = np.arange(m)
    out[..., d, d, 1:] = 0.0
    return out


class HermitianPD(DenseMatrix):
    """Hermitian m x m matrix; Hermitian symmetry is exact by construction.

    Only the lower triangle (and real part of the diagonal) of ``coeffs`` is
    read.  Positive definiteness is checked by consumers that need it
    (:meth:`check_pd`), so Gram matrices of rank-deficient inputs are
    representable.
    """

    __slots__ = ()

    def __init__(self, beta: int, coeffs):
        beta = check_beta(beta)
        arr = np.array(coeffs, dtype=float)
        if arr.ndim == 2 and beta == 1:
            arr = arr[..., None]
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"Hermitian matrix must be square, got {arr.shape[:2]}")
        super().__init__(beta, _hermitian_from_lower(arr))

    @classmethod
    def identity(cls, beta: int, m: int) -> "HermitianPD":
        return cls(beta, DenseMatrix.identity(beta, m).coeffs)

    @classmethod
    def from_embedded(cls, beta: int, E: np.ndarray) -> "HermitianPD":
        return cls(beta, unembed(hermitian_part(E), beta))

    @classmethod
    def from_json(cls, obj: dict) -> "HermitianPD":
        return cls(obj.get("beta"), DenseMatrix.from_json(obj).coeffs)

    def is_pd(self) -> bool:
        return bool(is_pd(self.embedded(), self.beta))

    def check_pd(self, name: str = "matrix") -> "HermitianPD":
        if not self.is_pd():
            raise NotPositiveDefiniteError(f"{name} is not positive definite")
        return self


@dataclass(frozen=True)
class SVDResult:
    """``X = left^* diag(singulars) right_rows``."""

    left: DenseMatrix
    singulars: np.ndarray
    right_rows: DenseMatrix
    degenerate: bool = False

    def reconstruct(self) -> DenseMatrix:
        m = self.singulars.size
        D = np.zeros((m, m, self.left.beta))
        D[np.arange(m), np.arange(m), 0] = self.singulars
        return adjoint(self.left) @ DenseMatrix(self.left.beta, D) @ self.right_rows


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def complex_embed(A: DenseMatrix) -> np.ndarray:
    return embed(A.coeffs, A.beta)


def complex_unembed(E: np.ndarray, beta: int) -> DenseMatrix:
    return DenseMatrix.from_embedded(beta, E)


def matmul(A: DenseMatrix, B: DenseMatrix) -> DenseMatrix:
    if A.beta != B.beta:
        raise DimensionError(f"beta mismatch: {A.beta} vs {B.beta}")
    check_beta(A.beta, matrix=True)
    if A.n != B.m:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    return DenseMatrix.from_embedded(A.beta, complex_embed(A) @ complex_embed(B))


def adjoint(A: DenseMatrix) -> DenseMatrix:
    check_beta(A.beta, matrix=True)
    return DenseMatrix(A.beta, _cd_conj(np.swapaxes(A.coeffs, 0, 1)))


def gram(A: DenseMatrix) -> HermitianPD:
    """``A A^*``."""
    E = complex_embed(A)
    return HermitianPD.from_embedded(A.beta, E @ _ct(E))


def cholesky(H: HermitianPD) -> DenseMatrix:
    """Lower-triangular ``L`` with real positive diagonal and ``L L^* = H``."""
    beta = check_beta(H.beta, matrix=True)
    E = complex_embed(H)
    if not is_pd(E, beta):
        raise NotPositiveDefiniteError("cholesky: matrix is not positive definite")
    try:
        L = np.linalg.cholesky(hermitian_part(E))
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("cholesky: matrix is not positive definite") from None
    coeffs = unembed(L, beta)
    coeffs[np.triu_indices(H.m, 1)] = 0.0
    d = np.arange(H.m)
    coeffs[d, d, 1:] = 0.0
    return DenseMatrix(beta, coeffs)


def herm_eigenvalues(H: DenseMatrix) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, in descending order."""
    beta = check_beta(H.beta, matrix=True)
    if H.m != H.n:
        raise DimensionError(f"eigenvalues need a square matrix, got {H.shape}")
    return embedded_eigvalsh(complex_embed(H), beta)


def logdet_hpd(H: HermitianPD) -> float:
    w = herm_eigenvalues(H)
    if not (w[-1] > PD_RTOL * w[0] and w[0] > 0):
        raise NotPositiveDefiniteError("logdet_hpd: matrix is not positive definite")
    return float(np.sum(np.log(w)))


def _symplectic_partner(u: np.ndarray) -> np.ndarray:
    """Second column of the quaternion column whose first embedded column is ``u``."""
    ub = u.conj()
    out = np.empty_like(u)
    out[0::2] = -ub[1::2]
    out[1::2] = ub[0::2]
    return out


def svd(X: DenseMatrix) -> SVDResult:
    """Thin SVD ``X = V^* D W_1`` for full-rank ``m <= n`` matrices.

    ``left`` is ``V`` (m x m unitary), ``right_rows`` is ``W_1`` (m x n with
    orthonormal rows) and ``singulars`` the diagonal of ``D``, descending.
    """
    beta = check_beta(X.beta, matrix=True)
    m, n = X.shape
    if m > n:
        raise DimensionError(f"svd needs m <= n, got {X.shape}")
    E = complex_embed(X)
    U, s, _ = np.linalg.svd(E, full_matrices=False)
    if beta == 4:
        s_pairs = s.reshape(m, 2)
        if np.any(np.abs(s_pairs[:, 0] - s_pairs[:, 1]) > PAIR_RTOL * max(s[0], 1e-300)):
            raise ConsistencyError("quaternion embedding singular values are not paired")
        sing = s_pairs.mean(axis=1)
        cols = []
        for k in range(m):
            u = U[:, 2 * k]
            cols += [u, _symplectic_partner(u)]
        U = np.stack(cols, axis=1)
        s_rep = np.repeat(sing, 2)
    else:
        sing = s
        s_rep = s
    if sing[-1] < 1e-12 * sing[0] or sing[0] == 0:
        raise DegenerateInputError("svd: input is rank deficient")
    W = (_ct(U) @ E) / s_rep[:, None]
    left = DenseMatrix.from_embedded(beta, _ct(U))
    right = DenseMatrix.from_embedded(beta, W)
    degenerate = bool(np.any(-np.diff(sing) <= TIE_RTOL * sing[0]))
    return SVDResult(left, sing, right, degenerate)
