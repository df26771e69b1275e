"""Log-density evaluators for the Pearson type II / beta type I families.

Every evaluator accepts either a single matrix (``DenseMatrix`` /
``HermitianPD``) or a raw coefficient array with leading batch axes,
``(..., rows, cols, beta)``, and returns a float or an array accordingly.
Points outside the support evaluate to ``-inf``; malformed parameters raise.

Normalizing constants are assembled in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from . import special
from .algebra import (
    MATRIX_BETAS,
    PD_RTOL,
    TIE_RTOL,
    DenseMatrix,
    HermitianPD,
    adjoint,
    embed,
    embedded_eigvalsh,
    hermitian_part,
)
from .errors import (
    DegenerateInputError,
    DimensionError,
    DomainError,
    ParameterError,
    SupportError,
)

__all__ = [
    "PearsonIIParams",
    "BetaIParams",
    "SpectralConfig",
    "SPECTRAL_FLAVORS",
    "pearson2_logpdf",
    "pearson2_logpdf_dual",
    "mmpearson2_logpdf",
    "beta1_logpdf",
    "mmbeta1_logpdf",
    "spectral_logpdf",
    "spectral_logpdf_values",
    "spectral_log_constant",
    "change_of_variables_check",
]

LOG_PI = special.LOG_PI
KINDS = ("matricvariate", "matrix_multivariate")
SPECTRAL_FLAVORS = ("singular_pearson", "singular_mm", "eigen_beta", "eigen_mm")


def _ct(E):
    return np.swapaxes(E, -1, -2).conj()


def _logdet_embedded(E: np.ndarray, beta: int) -> float:
    w = embedded_eigvalsh(E, beta)
    return float(np.sum(np.log(w)))


def _inv_embedded(E: np.ndarray) -> np.ndarray:
    return hermitian_part(np.linalg.inv(E))


def _real_trace(E: np.ndarray, beta: int) -> np.ndarray:
    t = np.real(np.trace(E, axis1=-2, axis2=-1))
    return t / 2.0 if beta == 4 else t


def _support_logdet(S: np.ndarray, beta: int):
    """Log-determinant of batched embedded Hermitian ``S`` with an in-support mask."""
    w = np.linalg.eigvalsh(hermitian_part(S))
    inside = (w[..., 0] > PD_RTOL * w[..., -1]) & (w[..., -1] > 0)
    safe = np.where(inside[..., None], w, 1.0)
    ld = np.sum(np.log(safe), axis=-1)
    if beta == 4:
        ld = ld / 2.0
    return ld, inside


def _as_coeffs(X, beta: int, shape: tuple, name: str) -> tuple[np.ndarray, bool]:
    if isinstance(X, DenseMatrix):
        if X.beta != beta:
            raise ParameterError(f"{name} has beta={X.beta}, parameters have beta={beta}")
        arr, batched = X.coeffs, False
    else:
        arr = np.asarray(X, dtype=float)
        if beta == 1 and arr.shape[-3:] != (*shape, 1) and arr.shape[-2:] == shape:
            arr = arr[..., None]
        batched = arr.ndim > 3
    if arr.shape[-3:] != (*shape, beta):
        raise DimensionError(f"{name} must have shape {shape} over beta={beta}, got {arr.shape}")
    return arr, batched


def _finish(val: np.ndarray, batched: bool):
    return val if batched else float(val)


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PearsonIIParams:
    """Parameters ``(nu, mu, B, D)`` of a (matrix multivariate) Pearson type II law.

    ``scale_left`` is the m x m matrix B and ``scale_right`` the n x n matrix
    D.  The two kinds use D differently: the matricvariate density involves
    ``B^-1 - (Q-mu) D^-1 (Q-mu)^*`` while the matrix multivariate density
    involves ``tr B (Q-mu) D (Q-mu)^*``.
    """

    nu: float
    mu: DenseMatrix
    scale_left: HermitianPD
    scale_right: HermitianPD
    beta: int
    kind: str = "matricvariate"

    def __post_init__(self):
        if self.beta not in MATRIX_BETAS:
            raise ParameterError(
                f"Pearson II parameters need beta in {MATRIX_BETAS}, got {self.beta}"
            )
        if self.kind not in KINDS:
            raise ParameterError(f"kind must be one of {KINDS}, got {self.kind!r}")
        for name, mat in (("mu", self.mu), ("scale_left", self.scale_left),
                          ("scale_right", self.scale_right)):
            if mat.beta != self.beta:
                raise ParameterError(f"{name} has beta={mat.beta}, expected {self.beta}")
        m, n = self.mu.shape
        if self.scale_left.shape != (m, m) or self.scale_right.shape != (n, n):
            raise DimensionError(
                f"scales must be {m}x{m} and {n}x{n}, got "
                f"{self.scale_left.shape} and {self.scale_right.shape}"
            )
        if not isinstance(self.scale_left, HermitianPD):
            object.__setattr__(self, "scale_left", HermitianPD(self.beta, self.scale_left.coeffs))
        if not isinstance(self.scale_right, HermitianPD):
            object.__setattr__(self, "scale_right", HermitianPD(self.beta, self.scale_right.coeffs))
        self.scale_left.check_pd("scale_left")
        self.scale_right.check_pd("scale_right")
        nu = float(self.nu)
        if not math.isfinite(nu):
            raise ParameterError(f"nu must be finite, got {nu}")
        if self.kind == "matricvariate" and not nu > self.beta * (m - 1):
            raise ParameterError(
                f"matricvariate Pearson II needs nu > beta(m-1) = {self.beta * (m - 1)}, got {nu}"
            )
        if self.kind == "matrix_multivariate" and not nu > 0:
            raise ParameterError(f"matrix multivariate Pearson II needs nu > 0, got {nu}")
        object.__setattr__(self, "nu", nu)

    @classmethod
    def standard(cls, beta: int, m: int, n: int, nu: float,
                 kind: str = "matricvariate") -> "PearsonIIParams":
        """Zero location and identity scales."""
        return cls(nu, DenseMatrix.zeros(beta, m, n), HermitianPD.identity(beta, m),
                   HermitianPD.identity(beta, n), beta, kind)

    @property
    def m(self) -> int:
        return self.mu.m

    @property
    def n(self) -> int:
        return self.mu.n

    def transposed(self) -> "PearsonIIParams":
        """Parameters of ``Q^*`` when ``Q`` follows these (matricvariate) parameters.

        ``Q^* ~ PII_{n x m}(nu + n - m, mu^*, D^-1, B^-1)``.
        """
        if self.kind != "matricvariate":
            raise ParameterError("transposed() is defined for the matricvariate kind")
        return PearsonIIParams(
            self.nu + self.n - self.m,
            adjoint(self.mu),
            HermitianPD.from_embedded(self.beta, self._D_inv),
            HermitianPD.from_embedded(self.beta, self._B_inv),
            self.beta,
        )

    # embedded quantities, computed once
    @cached_property
    def _mu(self):
        return embed(self.mu.coeffs, self.beta)

    @cached_property
    def _B(self):
        return embed(self.scale_left.coeffs, self.beta)

    @cached_property
    def _D(self):
        return embed(self.scale_right.coeffs, self.beta)

    @cached_property
    def _B_inv(self):
        return _inv_embedded(self._B)

    @cached_property
    def _D_inv(self):
        return _inv_embedded(self._D)

    @cached_property
    def logdet_left(self) -> float:
        return _logdet_embedded(self._B, self.beta)

    @cached_property
    def logdet_right(self) -> float:
        return _logdet_embedded(self._D, self.beta)


@dataclass(frozen=True)
class BetaIParams:
    """Parameters of the beta type I laws of ``R R^*`` (wide) or ``R^* R`` (tall).

    ``m`` and ``n_dof`` describe the underlying m x n Pearson II matrix, so
    a wide variate is m x m and a tall variate is n x n.  ``orientation``
    defaults to ``wide`` when ``n_dof >= m``.
    """

    n_dof: float
    nu: float
    m: int
    beta: int
    orientation: str | None = None

    def __post_init__(self):
        if self.beta not in MATRIX_BETAS:
            raise ParameterError(f"beta type I parameters need beta in {MATRIX_BETAS}")
        if int(self.m) != self.m or self.m < 1:
            raise DimensionError(f"m must be a positive integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        n, m, beta = float(self.n_dof), self.m, self.beta
        object.__setattr__(self, "n_dof", n)
        object.__setattr__(self, "nu", float(self.nu))
        orientation = self.orientation or ("wide" if n >= m else "tall")
        if orientation not in ("wide", "tall"):
            raise ParameterError(f"orientation must be 'wide' or 'tall', got {orientation!r}")
        object.__setattr__(self, "orientation", orientation)
        if orientation == "wide":
            if not n > beta * (m - 1):
                raise ParameterError(f"wide beta type I needs n > beta(m-1) = {beta * (m - 1)}, got n={n}")
        else:
            if n != int(n) or n < 1:
                raise DimensionError(f"tall beta type I needs integer n >= 1, got {n}")
            if not m > beta * (n - 1):
                raise ParameterError(f"tall beta type I needs m > beta(n-1) = {beta * (n - 1)}, got m={m}")
        if not self.nu > 0:
            raise ParameterError(f"nu must be positive, got {self.nu}")

    @property
    def dim(self) -> int:
        """Dimension of the beta variate."""
        return self.m if self.orientation == "wide" else int(self.n_dof)

    def substituted(self) -> tuple[int, float, float]:
        """``(dim, n_eff, nu_eff)`` after the m <-> n swap for tall variates.

        Matricvariate laws also shift ``nu -> nu + n - m``; see
        :meth:`substituted_mm` for the matrix multivariate swap.
        """
        if self.orientation == "wide":
            return self.m, self.n_dof, self.nu
        return int(self.n_dof), float(self.m), self.nu + self.n_dof - self.m

    def substituted_mm(self) -> tuple[int, float, float]:
        if self.orientation == "wide":
            return self.m, self.n_dof, self.nu
        return int(self.n_dof), float(self.m), self.nu


@dataclass(frozen=True)
class SpectralConfig:
    """Ordered singular values or eigenvalues with the parameters of their law.

    ``values`` has length m and must satisfy ``1 > v_1 > ... > v_m > 0``;
    ``beta`` may be any positive real.
    """

    values: tuple
    n: float
    nu: float
    beta: float
    flavor: str = "singular_pearson"

    def __post_init__(self):
        if self.flavor not in SPECTRAL_FLAVORS:
            raise ParameterError(f"flavor must be one of {SPECTRAL_FLAVORS}, got {self.flavor!r}")
        vals = tuple(float(v) for v in np.atleast_1d(self.values))
        if not vals or not all(math.isfinite(v) for v in vals):
            raise ParameterError("values must be a non-empty vector of finite reals")
        object.__setattr__(self, "values", vals)
        if not float(self.beta) > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "n", float(self.n))
        object.__setattr__(self, "nu", float(self.nu))
        if self.n < self.m:
            raise DimensionError(
                f"n={self.n} < m={self.m}; use SpectralConfig.tall for n < m"
            )

    @property
    def m(self) -> int:
        return len(self.values)

    @classmethod
    def tall(cls, values, m: int, n: int, nu: float, beta: float,
             flavor: str = "singular_pearson") -> "SpectralConfig":
        """Spectrum of an m x n variate with n < m (n values), via the m <-> n swap."""
        if flavor in ("singular_pearson", "eigen_beta"):
            return cls(values, m, nu + n - m, beta, flavor)
        return cls(values, m, nu, beta, flavor)

    def with_values(self, values, flavor: str | None = None) -> "SpectralConfig":
        return SpectralConfig(tuple(values), self.n, self.nu, self.beta, flavor or self.flavor)


# ---------------------------------------------------------------------------
# matricvariate Pearson II
# ---------------------------------------------------------------------------

def _require_kind(p: PearsonIIParams, kind: str):
    if p.kind != kind:
        raise ParameterError(f"expected {kind} parameters, got kind={p.kind!r}")


def _pearson2_log_constant(p: PearsonIIParams) -> float:
    m, n, nu, b = p.m, p.n, p.nu, p.beta
    return (special.log_mgamma(b, m, b * (n + nu) / 2) - special.log_mgamma(b, m, b * nu / 2)
            - m * n * b / 2 * LOG_PI)


def pearson2_logpdf(Q, p: PearsonIIParams):
    """Log-density of the matricvariate Pearson type II law ``PII(nu, mu, B, D)``."""
    _require_kind(p, "matricvariate")
    m, n, nu, b = p.m, p.n, p.nu, p.beta
    coeffs, batched = _as_coeffs(Q, b, (m, n), "Q")
    A = embed(coeffs, b) - p._mu
    S = p._B_inv - A @ p._D_inv @ _ct(A)
    ld, inside = _support_logdet(S, b)
    const = (_pearson2_log_constant(p)
             + (b * (nu + n - m + 1) / 2 - 1) * p.logdet_left
             - b * m / 2 * p.logdet_right)
    val = np.where(inside, const + (b * (nu - m + 1) / 2 - 1) * ld, -np.inf)
    return _finish(val, batched)


def pearson2_logpdf_dual(Q, p: PearsonIIParams):
    """Same density through the n x n determinant ``|D - (Q-mu)^* B (Q-mu)|``."""
    _require_kind(p, "matricvariate")
    m, n, nu, b = p.m, p.n, p.nu, p.beta
    coeffs, batched = _as_coeffs(Q, b, (m, n), "Q")
    A = embed(coeffs, b) - p._mu
    S = p._D - _ct(A) @ p._B @ A
    ld, inside = _support_logdet(S, b)
    const = (special.log_mgamma(b, n, b * (n + nu) / 2)
             - special.log_mgamma(b, n, b * (nu + n - m) / 2)
             - m * n * b / 2 * LOG_PI
             + b * n / 2 * p.logdet_left
             - (b * (nu + 1) / 2 - 1) * p.logdet_right)
    val = np.where(inside, const + (b * (nu - m + 1) / 2 - 1) * ld, -np.inf)
    return _finish(val, batched)


# ---------------------------------------------------------------------------
# matrix multivariate Pearson II
# ---------------------------------------------------------------------------

def mmpearson2_logpdf(Q, p: PearsonIIParams):
    """Log-density of the matrix multivariate Pearson type II law ``MPII(nu, mu, B, D)``."""
    _require_kind(p, "matrix_multivariate")
    m, n, nu, b = p.m, p.n, p.nu, p.beta
    coeffs, batched = _as_coeffs(Q, b, (m, n), "Q")
    A = embed(coeffs, b) - p._mu
    t = _real_trace(p._B @ A @ p._D @ _ct(A), b)
    inside = t < 1.0
    const = (gammaln(b * (nu + m * n) / 2) - gammaln(b * nu / 2) - b * m * n / 2 * LOG_PI
             + b * n / 2 * p.logdet_left + b * m / 2 * p.logdet_right)
    slack = np.where(inside, 1.0 - t, 1.0)
    val = np.where(inside, const + (b * nu / 2 - 1) * np.log(slack), -np.inf)
    return _finish(val, batched)


# ---------------------------------------------------------------------------
# beta type I
# ---------------------------------------------------------------------------

def _hermitian_coeffs(B, beta: int, k: int) -> tuple[np.ndarray, bool]:
    if isinstance(B, DenseMatrix) and not isinstance(B, HermitianPD):
        B = B.coeffs
    coeffs, batched = _as_coeffs(B, beta, (k, k), "B")
    if not isinstance(B, HermitianPD):
        E = embed(coeffs, beta)
        scale = max(float(np.abs(E).max()), 1.0)
        if np.abs(E - _ct(E)).max() > 1e-10 * scale:
            raise ParameterError("beta type I argument is not Hermitian")
    return coeffs, batched


def _eig_support(coeffs: np.ndarray, beta: int):
    w = np.linalg.eigvalsh(hermitian_part(embed(coeffs, beta)))
    if beta == 4:
        w = w[..., 0::2]
    return w


def beta1_logpdf(B, p: BetaIParams):
    """Log-density of the matricvariate beta type I law.

    Wide parameters evaluate the density of ``R R^*``; tall parameters that
    of ``R^* R`` via ``m -> n, n -> m, nu -> nu + n - m``.
    """
    k, n_eff, nu_eff = p.substituted()
    b = p.beta
    if not nu_eff > b * (k - 1):
        raise ParameterError(
            f"matricvariate beta type I needs nu > beta(m-1) after substitution, got {nu_eff}"
        )
    coeffs, batched = _hermitian_coeffs(B, b, k)
    w = _eig_support(coeffs, b)
    inside = (w[..., 0] > PD_RTOL * w[..., -1]) & (1 - w[..., -1] > PD_RTOL * (1 - w[..., 0]))
    inside &= (w[..., 0] > 0) & (w[..., -1] < 1)
    safe = np.where(inside[..., None], w, 0.5)
    const = -special.log_mbeta(b, k, b * nu_eff / 2, b * n_eff / 2)
    val = (const + (b * (n_eff - k + 1) / 2 - 1) * np.log(safe).sum(-1)
           + (b * (nu_eff - k + 1) / 2 - 1) * np.log1p(-safe).sum(-1))
    return _finish(np.where(inside, val, -np.inf), batched)


def mmbeta1_logpdf(B1, p: BetaIParams):
    """Log-density of the matrix multivariate beta type I law (support ``B1 > 0``, ``tr B1 < 1``)."""
    k, n_eff, nu = p.substituted_mm()
    b = p.beta
    m_orig = p.m
    mn = m_orig * p.n_dof
    coeffs, batched = _hermitian_coeffs(B1, b, k)
    w = _eig_support(coeffs, b)
    tr = w.sum(-1)
    inside = (w[..., 0] > PD_RTOL * w[..., -1]) & (w[..., -1] > 0) & (tr < 1)
    safe = np.where(inside[..., None], w, 1.0 / (2 * k))
    try:
        const = (gammaln(b * (nu + mn) / 2) - gammaln(b * nu / 2)
                 - special.log_mgamma(b, k, b * n_eff / 2))
    except DomainError as exc:
        raise ParameterError(str(exc)) from None
    val = (const + (b * (n_eff - k + 1) / 2 - 1) * np.log(safe).sum(-1)
           + (b * nu / 2 - 1) * np.log1p(-safe.sum(-1)))
    return _finish(np.where(inside, val, -np.inf), batched)


# ---------------------------------------------------------------------------
# spectral densities
# ---------------------------------------------------------------------------

def spectral_log_constant(flavor: str, beta: float, m: int, n: float, nu: float,
                          printed: bool = False) -> float:
    """Log normalizing constant of a spectral density.

    With ``printed=True`` the pi exponent and tau table are taken literally
    from the published displays (``beta m^2 + tau`` for the Pearson
    flavors); used only as a negative control.
    """
    if flavor not in SPECTRAL_FLAVORS:
        raise ParameterError(f"unknown flavor {flavor!r}")
    b = float(beta)
    if printed:
        pi_exp = (b * m * m if flavor in ("singular_pearson", "eigen_beta") else b * m * m / 2)
        log_pi_part = (pi_exp + special.tau(beta, m)) * LOG_PI
    else:
        log_pi_part = b * m * m / 2 * LOG_PI + special.log_phase_volume(b, m)
    try:
        c = log_pi_part - special.log_mgamma(b, m, b * m / 2)
        if flavor in ("singular_pearson", "eigen_beta"):
            c -= special.log_mbeta(b, m, b * nu / 2, b * n / 2)
        else:
            if not nu > 0:
                raise ParameterError(f"nu must be positive, got {nu}")
            c += (gammaln(b * (nu + m * n) / 2) - gammaln(b * nu / 2)
                  - special.log_mgamma(b, m, b * n / 2))
    except DomainError as exc:
        raise ParameterError(str(exc)) from None
    if flavor.startswith("singular"):
        c += m * math.log(2.0)
    return float(c)


def spectral_logpdf_values(values, flavor: str, beta: float, n: float, nu: float,
                           printed: bool = False) -> np.ndarray:
    """Vectorized spectral log-density over the last axis of ``values``.

    Returns ``-inf`` wherever a row is not strictly decreasing or leaves the
    support; no errors are raised for such rows.
    """
    v = np.asarray(values, dtype=float)
    m = v.shape[-1]
    b = float(beta)
    const = spectral_log_constant(flavor, b, m, n, nu, printed)
    squared = flavor.startswith("singular")
    x = v * v if squared else v  # eigenvalue scale
    inside = (v[..., -1] > 0) & (v[..., 0] < 1)
    if m > 1:
        inside &= np.all(np.diff(v, axis=-1) < 0, axis=-1)
    mm_flavor = flavor in ("singular_mm", "eigen_mm")
    if mm_flavor:
        inside &= x.sum(-1) < 1
    safe_v = np.where(inside[..., None], v, 0.5 / m)
    safe_x = safe_v * safe_v if squared else safe_v
    if squared:
        val = (b * (n - m + 1) - 1) * np.log(safe_v).sum(-1)
    else:
        val = (b * (n - m + 1) / 2 - 1) * np.log(safe_x).sum(-1)
    if mm_flavor:
        val = val + (b * nu / 2 - 1) * np.log1p(-safe_x.sum(-1))
    else:
        val = val + (b * (nu - m + 1) / 2 - 1) * np.log1p(-safe_x).sum(-1)
    if m > 1:
        iu, ju = np.triu_indices(m, 1)
        gaps = safe_x[..., iu] - safe_x[..., ju]
        gaps = np.where(inside[..., None], gaps, 1.0)
        val = val + b * np.log(gaps).sum(-1)
    return np.where(inside, const + val, -np.inf)


def _check_spectral(c: SpectralConfig):
    v = np.array(c.values)
    if c.m > 1:
        gaps = -np.diff(v)
        if np.any(np.abs(gaps) <= TIE_RTOL * max(abs(v[0]), 1e-300)):
            raise DegenerateInputError(f"spectral values {c.values} contain ties")
        if np.any(gaps < 0):
            raise SupportError(f"spectral values must be strictly decreasing, got {c.values}")
    if not (v[0] < 1 and v[-1] > 0):
        raise SupportError(f"spectral values must lie in (0, 1), got {c.values}")
    if c.flavor == "singular_mm" and not np.sum(v * v) < 1:
        raise SupportError("singular_mm values need sum of squares < 1")
    if c.flavor == "eigen_mm" and not np.sum(v) < 1:
        raise SupportError("eigen_mm values need sum < 1")


def spectral_logpdf(c: SpectralConfig, printed: bool = False) -> float:
    """Joint log-density of ordered singular values / eigenvalues."""
    _check_spectral(c)
    return float(spectral_logpdf_values(np.array(c.values), c.flavor, c.beta, c.n, c.nu, printed))


_EIGEN_OF = {"singular_pearson": "eigen_beta", "singular_mm": "eigen_mm"}


def change_of_variables_check(c_sv: SpectralConfig) -> float:
    """``log f_sv(d) - [log f_eig(d^2) + sum log(2 d_i)]``; zero up to rounding."""
    if c_sv.flavor not in _EIGEN_OF:
        raise ParameterError("change_of_variables_check needs a singular-value flavor")
    d = np.array(c_sv.values)
    c_eig = c_sv.with_values(d * d, _EIGEN_OF[c_sv.flavor])
    return spectral_logpdf(c_sv) - (spectral_logpdf(c_eig) + float(np.sum(np.log(2 * d))))
