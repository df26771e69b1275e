"""Exact samplers built from the stochastic representations of each law.

Gaussian convention
-------------------
A standardized Gaussian element of the algebra has ``beta`` independent real
coefficients, each with variance ``1/beta`` (so ``E|x|^2 = 1``).  Under this
convention the Wishart law ``W_m^beta(nu, Sigma)`` has density proportional
to ``|U|^(beta(nu-m+1)/2 - 1) etr(-beta Sigma^-1 U / 2)`` and mean
``nu Sigma``.  This differs from the unit-variance-per-coefficient
convention used by most complex/quaternion Gaussian samplers.

Every sampler takes ``rng`` (a ``numpy.random.Generator`` or anything
accepted by ``numpy.random.default_rng``) and an optional ``size``.  With
``size=None`` a single ``DenseMatrix``/``HermitianPD``/float is returned;
otherwise a coefficient array with a leading axis of length ``size``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    MATRIX_BETAS,
    DenseMatrix,
    HermitianPD,
    check_beta,
    embed,
    hermitian_part,
    unembed,
)
from .densities import BetaIParams, PearsonIIParams, SpectralConfig, spectral_logpdf_values
from .errors import DiagnosticsError, ParameterError, UnsupportedAlgebraError

__all__ = [
    "as_rng",
    "split_rng",
    "EllipticalGenerator",
    "WishartParams",
    "SpectralDraws",
    "standard_normal_coeffs",
    "sample_normal",
    "sample_chi2beta",
    "sample_wishart",
    "sample_pearson2",
    "pearson2_construction",
    "sample_mmpearson2",
    "mmpearson2_construction",
    "sample_beta1",
    "sample_spectral",
]

CONSTRUCTIONS = ("theorem1", "corollary3", "elliptical")


def as_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def split_rng(rng, k: int) -> list[np.random.Generator]:
    """Independent child streams (``SeedSequence`` spawning)."""
    return as_rng(rng).spawn(k)


def _matrix_beta(beta) -> int:
    if beta == 8:
        raise UnsupportedAlgebraError("octonion matrix sampling unsupported")
    if beta not in MATRIX_BETAS:
        raise ParameterError(f"beta must be one of {MATRIX_BETAS}, got {beta!r}")
    return int(beta)


def _ct(E):
    return np.swapaxes(E, -1, -2).conj()


def _n(size) -> int:
    return 1 if size is None else int(size)


def _is_integer(x) -> bool:
    return float(x) == int(x)


@dataclass(frozen=True)
class EllipticalGenerator:
    """Law of the m x (n + nu) block in the elliptical construction.

    ``matrix_t`` is the scale mixture ``Z / sqrt(G / df)`` with a single
    real ``G ~ chi2(df)`` per draw.
    """

    kind: str = "normal"
    df: float | None = None

    def __post_init__(self):
        if self.kind not in ("normal", "matrix_t"):
            raise ParameterError(f"generator kind must be 'normal' or 'matrix_t', got {self.kind!r}")
        if self.kind == "matrix_t" and not (self.df is not None and self.df > 0):
            raise ParameterError(f"matrix_t generator needs df > 0, got {self.df}")

    def describe(self) -> dict:
        return {"kind": self.kind, "df": self.df, "mixing": "real chi2(df)" if self.df else None}


@dataclass(frozen=True)
class WishartParams:
    beta: int
    m: int
    nu: float
    sigma: HermitianPD | None = None

    def __post_init__(self):
        _matrix_beta(self.beta)
        if not self.nu > self.beta * (self.m - 1):
            raise ParameterError(
                f"Wishart needs nu > beta(m-1) = {self.beta * (self.m - 1)}, got {self.nu}"
            )
        if self.sigma is not None:
            if self.sigma.shape != (self.m, self.m) or self.sigma.beta != self.beta:
                raise ParameterError("sigma must be an m x m Hermitian matrix over the same algebra")
            self.sigma.check_pd("sigma")


# ---------------------------------------------------------------------------
# building blocks on embedded arrays
# ---------------------------------------------------------------------------

def standard_normal_coeffs(rng, beta: int, shape: tuple) -> np.ndarray:
    """Coefficients of standardized Gaussian entries (variance ``1/beta`` each)."""
    return as_rng(rng).normal(0.0, 1.0 / math.sqrt(beta), size=(*shape, beta))


def _chi2beta(rng, beta: float, nu, size):
    return rng.gamma(beta * np.asarray(nu) / 2.0, 2.0 / beta, size=size)


def _gram_wishart(rng, beta, m, nu: int, count):
    Z = embed(standard_normal_coeffs(rng, beta, (count, m, int(nu))), beta)
    return Z @ _ct(Z)


def _bartlett_wishart(rng, beta, m, nu, count):
    T = standard_normal_coeffs(rng, beta, (count, m, m))
    T[..., np.triu_indices(m)[0], np.triu_indices(m)[1], :] = 0.0
    dof = nu - np.arange(m)
    diag = np.sqrt(_chi2beta(rng, beta, np.broadcast_to(dof, (count, m)), (count, m)))
    T[:, np.arange(m), np.arange(m), 0] = diag
    E = embed(T, beta)
    return E @ _ct(E)


def _wishart_embedded(rng, beta, m, nu, count, method="auto"):
    if method == "auto":
        method = "gram" if _is_integer(nu) else "bartlett"
    if method == "gram":
        if not _is_integer(nu):
            raise ParameterError(f"Gram construction needs integer nu, got {nu}")
        return _gram_wishart(rng, beta, m, nu, count)
    if method == "bartlett":
        return _bartlett_wishart(rng, beta, m, nu, count)
    raise ParameterError(f"unknown Wishart method {method!r}")


def _chol(E):
    return np.linalg.cholesky(hermitian_part(E))


def _sym_sqrt(E):
    w, V = np.linalg.eigh(hermitian_part(E))
    return (V * np.sqrt(w)[..., None, :]) @ _ct(V)


def _finish_matrix(E, beta, size, cls=DenseMatrix):
    if cls is HermitianPD:
        E = hermitian_part(E)
    coeffs = unembed(E, beta)
    if size is None:
        return cls(beta, coeffs[0])
    return coeffs


# ---------------------------------------------------------------------------
# public samplers
# ---------------------------------------------------------------------------

def sample_normal(rng, beta: int, m: int, n: int, sigma_left: HermitianPD | None = None,
                  theta_right: HermitianPD | None = None, size=None):
    """``L_sigma Z L_theta^*`` with ``Z`` standardized and ``L`` Cholesky factors."""
    beta = _matrix_beta(beta)
    rng = as_rng(rng)
    E = embed(standard_normal_coeffs(rng, beta, (_n(size), m, n)), beta)
    if sigma_left is not None:
        E = _chol(embed(sigma_left.check_pd("sigma_left").coeffs, beta)) @ E
    if theta_right is not None:
        E = E @ _ct(_chol(embed(theta_right.check_pd("theta_right").coeffs, beta)))
    return _finish_matrix(E, beta, size)


def sample_chi2beta(rng, beta: float, nu: float, size=None):
    """Draw from ``chi^{2,beta}(nu)`` = Gamma(shape beta nu / 2, rate beta / 2)."""
    if not nu > 0:
        raise ParameterError(f"chi2beta needs nu > 0, got {nu}")
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    out = _chi2beta(as_rng(rng), float(beta), float(nu), size)
    return float(out) if size is None else out


def sample_wishart(rng, p: WishartParams, size=None, method: str = "auto"):
    """Wishart draws; Gram of a Gaussian for integer ``nu`` and Bartlett otherwise."""
    rng = as_rng(rng)
    E = _wishart_embedded(rng, p.beta, p.m, p.nu, _n(size), method)
    if p.sigma is not None:
        L = _chol(embed(p.sigma.coeffs, p.beta))
        E = L @ E @ _ct(L)
    return _finish_matrix(E, p.beta, size, HermitianPD)


def _corollary3_check(beta, m, n, nu):
    if not nu + n - m > beta * (n - 1):
        raise ParameterError(
            f"corollary3 construction needs nu + n - m > beta(n-1) = {beta * (n - 1)}, "
            f"got nu + n - m = {nu + n - m}"
        )


def pearson2_construction(rng, beta: int, m: int, n: int, nu: float, size: int,
                          construction: str = "theorem1",
                          generator: EllipticalGenerator | None = None,
                          root: str = "cholesky"):
    """Standard ``PII(nu, 0, I, I)`` draws with the auxiliary matrix.

    Returns embedded arrays ``(R, U)`` where ``U`` is the matrix whose square
    root standardizes the Gaussian block: ``U = U1 + X X^*`` (theorem1),
    ``V = V1 + Y^* Y`` (corollary3) or ``V = X2 X2^* + X1 X1^*`` (elliptical).
    """
    beta = _matrix_beta(beta)
    rng = as_rng(rng)
    if construction not in CONSTRUCTIONS:
        raise ParameterError(f"construction must be one of {CONSTRUCTIONS}, got {construction!r}")
    if root not in ("cholesky", "symmetric"):
        raise ParameterError(f"root must be 'cholesky' or 'symmetric', got {root!r}")
    sqrt = _chol if root == "cholesky" else _sym_sqrt

    if construction == "theorem1":
        if not nu > beta * (m - 1):
            raise ParameterError(f"theorem1 construction needs nu > beta(m-1) = {beta * (m - 1)}")
        U1 = _wishart_embedded(rng, beta, m, nu, size)
        X = embed(standard_normal_coeffs(rng, beta, (size, m, n)), beta)
        U = U1 + X @ _ct(X)
        R = np.linalg.solve(sqrt(U), X)
        return R, U

    if construction == "corollary3":
        _corollary3_check(beta, m, n, nu)
        V1 = _wishart_embedded(rng, beta, n, nu + n - m, size)
        Y = embed(standard_normal_coeffs(rng, beta, (size, m, n)), beta)
        V = V1 + _ct(Y) @ Y
        R = _ct(np.linalg.solve(sqrt(V), _ct(Y)))
        return R, V

    generator = generator or EllipticalGenerator()
    if not _is_integer(nu) or nu < m:
        raise ParameterError(f"elliptical construction needs integer nu >= m, got nu={nu}")
    nu = int(nu)
    Z = standard_normal_coeffs(rng, beta, (size, m, n + nu))
    if generator.kind == "matrix_t":
        G = rng.chisquare(generator.df, size=size)
        Z = Z / np.sqrt(G / generator.df)[:, None, None, None]
    X1 = embed(Z[:, :, :n], beta)
    X2 = embed(Z[:, :, n:], beta)
    V = X2 @ _ct(X2) + X1 @ _ct(X1)
    R = np.linalg.solve(sqrt(V), X1)
    return R, V


def _affine(R, p: PearsonIIParams):
    """Map standard draws to ``(nu, mu, B, D)``.

    matricvariate: ``Q = (M^*)^-1 R N^* + mu``; matrix multivariate:
    ``Q = (M^*)^-1 R N^-1 + mu``; ``B = M M^*`` and ``D = N N^*``.
    """
    b = p.beta
    M = _chol(p._B)
    N = _chol(p._D)
    Q = np.linalg.solve(_ct(M), R)
    if p.kind == "matricvariate":
        Q = Q @ _ct(N)
    else:
        Q = _ct(np.linalg.solve(_ct(N), _ct(Q)))
    return Q + p._mu


def sample_pearson2(rng, p: PearsonIIParams, construction: str = "theorem1",
                    generator: EllipticalGenerator | None = None, size=None,
                    root: str = "cholesky"):
    """Draws from ``PII_{m x n}(nu, mu, B, D)``."""
    if p.kind != "matricvariate":
        raise ParameterError("sample_pearson2 needs matricvariate parameters")
    R, _ = pearson2_construction(rng, p.beta, p.m, p.n, p.nu, _n(size), construction,
                                 generator, root)
    return _finish_matrix(_affine(R, p), p.beta, size)


def mmpearson2_construction(rng, beta: int, m: int, n: int, nu: float, size: int):
    """Standard ``MPII(nu, 0, I, I)`` draws ``R1 = S1^(-1/2) Y`` with ``S1 = S + tr Y Y^*``.

    Returns the embedded ``R1`` and the real ``S1``.
    """
    beta = _matrix_beta(beta)
    if not nu > 0:
        raise ParameterError(f"matrix multivariate Pearson II needs nu > 0, got {nu}")
    rng = as_rng(rng)
    S = _chi2beta(rng, beta, nu, size)
    Yc = standard_normal_coeffs(rng, beta, (size, m, n))
    S1 = S + np.sum(Yc * Yc, axis=(1, 2, 3))
    R1 = embed(Yc, beta) / np.sqrt(S1)[:, None, None]
    return R1, S1


def sample_mmpearson2(rng, p: PearsonIIParams, size=None):
    """Draws from ``MPII_{m x n}(nu, mu, B, D)``."""
    if p.kind != "matrix_multivariate":
        raise ParameterError("sample_mmpearson2 needs matrix_multivariate parameters")
    R1, _ = mmpearson2_construction(rng, p.beta, p.m, p.n, p.nu, _n(size))
    return _finish_matrix(_affine(R1, p), p.beta, size)


def sample_beta1(rng, p: BetaIParams, flavor: str = "matricvariate", size=None):
    """Beta type I draws as Gram images ``R R^*`` (wide) or ``R^* R`` (tall).

    Non-integer ``n`` (wide only) uses the equivalent Wishart ratio
    ``L^-1 W L^-*`` (matricvariate) or ``W / (S + tr W)`` (matrix
    multivariate) with a Bartlett-sampled ``W``.
    """
    beta = _matrix_beta(p.beta)
    rng = as_rng(rng)
    count = _n(size)
    m, n, nu = p.m, p.n_dof, p.nu
    if flavor == "matricvariate":
        if p.orientation == "tall":
            R, _ = pearson2_construction(rng, beta, m, int(n), nu, count, "corollary3")
            B = _ct(R) @ R
        elif _is_integer(n):
            R, _ = pearson2_construction(rng, beta, m, int(n), nu, count, "theorem1")
            B = R @ _ct(R)
        else:
            if not nu > beta * (m - 1):
                raise ParameterError(f"needs nu > beta(m-1) = {beta * (m - 1)}, got {nu}")
            W = _wishart_embedded(rng, beta, m, n, count, "bartlett")
            U1 = _wishart_embedded(rng, beta, m, nu, count)
            L = _chol(W + U1)
            LiW = np.linalg.solve(L, W)
            B = _ct(np.linalg.solve(L, _ct(LiW)))
    elif flavor == "matrix_multivariate":
        if p.orientation == "tall":
            R1, _ = mmpearson2_construction(rng, beta, m, int(n), nu, count)
            B = _ct(R1) @ R1
        elif _is_integer(n):
            R1, _ = mmpearson2_construction(rng, beta, m, int(n), nu, count)
            B = R1 @ _ct(R1)
        else:
            W = _wishart_embedded(rng, beta, m, n, count, "bartlett")
            S = _chi2beta(rng, beta, nu, count)
            tr = np.real(np.trace(W, axis1=-2, axis2=-1)) / (2.0 if beta == 4 else 1.0)
            B = W / (S + tr)[:, None, None]
    else:
        raise ParameterError(f"flavor must be 'matricvariate' or 'matrix_multivariate', got {flavor!r}")
    return _finish_matrix(B, beta, size, HermitianPD)


# ---------------------------------------------------------------------------
# spectral MCMC
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralDraws:
    values: np.ndarray
    acceptance_rate: float
    step_size: float
    chains: int
    burn_in: int
    thin: int


def _spectral_start(flavor: str, m: int) -> np.ndarray:
    v = (m - np.arange(m) - 0.5) / (m + 1.0)
    if flavor == "singular_mm":
        v = v * math.sqrt(0.5 / np.sum(v * v))
    elif flavor == "eigen_mm":
        v = v * (0.5 / np.sum(v))
    return v


def sample_spectral(rng, c: SpectralConfig, n_draws: int, burn_in: int = 1000,
                    thin: int = 10, step_size: float | None = None,
                    chains: int | None = None, target=(0.2, 0.4)) -> SpectralDraws:
    """Random-walk Metropolis on the ordered support of a spectral density.

    ``c`` is a template: its flavor, ``n``, ``nu``, ``beta`` and length of
    ``values`` are used.  Independent chains run in lockstep; proposals
    leaving the ordered support are rejected.  When ``step_size`` is None it
    is tuned during burn-in towards the ``target`` acceptance band.
    """
    rng = as_rng(rng)
    m = c.m
    if n_draws < 1:
        raise ParameterError("n_draws must be positive")
    chains = chains or min(n_draws, 1000)
    per_chain = -(-n_draws // chains)
    logpdf = lambda v: spectral_logpdf_values(v, c.flavor, c.beta, c.n, c.nu)  # noqa: E731

    x = np.tile(_spectral_start(c.flavor, m), (chains, 1))
    lp = logpdf(x)
    tune = step_size is None
    step = 0.3 / (m + 1) if tune else float(step_size)

    def advance(k):
        nonlocal x, lp
        accepted = 0
        for _ in range(k):
            prop = x + step * rng.standard_normal(x.shape)
            lp_prop = logpdf(prop)
            take = np.log(rng.random(chains)) < lp_prop - lp
            x = np.where(take[:, None], prop, x)
            lp = np.where(take, lp_prop, lp)
            accepted += int(take.sum())
        return accepted / (k * chains)

    window = 50
    done = 0
    rate = 0.0
    while done < burn_in:
        k = min(window, burn_in - done)
        rate = advance(k)
        done += k
        if tune:
            if rate < target[0]:
                step *= 0.7 if rate > 0 else 0.3
            elif rate > target[1]:
                step *= 1.4
    if burn_in and rate == 0.0:
        raise DiagnosticsError("spectral MCMC: zero acceptance after warm-up")

    out = np.empty((per_chain, chains, m))
    total = 0.0
    for i in range(per_chain):
        total += advance(thin)
        out[i] = x
    acc = total / per_chain
    if acc == 0.0:
        raise DiagnosticsError("spectral MCMC: zero acceptance after warm-up")
    values = out.reshape(-1, m)[:n_draws]
    return SpectralDraws(values, acc, step, chains, burn_in, thin)
