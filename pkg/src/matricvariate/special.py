"""Log-domain special functions over the symmetric cones of R, C, H, O.

All functions accept a real ``beta > 0``; ``beta`` is not restricted to the
four algebra dimensions.
"""
from __future__ import annotations

import math

from scipy.special import gammaln

from .errors import DimensionError, DomainError, ParameterError

__all__ = [
    "log_mgamma",
    "log_mbeta",
    "log_stiefel_volume",
    "tau",
    "log_phase_volume",
]

LOG_PI = math.log(math.pi)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta > 0 or not math.isfinite(beta):
        raise ParameterError(f"beta must be a positive real, got {beta}")
    return beta


def _check_dim(m) -> int:
    if int(m) != m or m < 1:
        raise DimensionError(f"matrix dimension must be a positive integer, got {m}")
    return int(m)


def log_mgamma(beta: float, m: int, a: float) -> float:
    """Log of the multivariate gamma function.

    ``pi**(m(m-1)beta/4) * prod_{i=1..m} Gamma(a - (i-1) beta/2)``

    Raises
    ------
    DomainError
        If some factor ``a - (i-1) beta/2`` is not positive.
    """
    beta = _check_beta(beta)
    m = _check_dim(m)
    a = float(a)
    total = m * (m - 1) * beta / 4.0 * LOG_PI
    for i in range(1, m + 1):
        arg = a - (i - 1) * beta / 2.0
        if not arg > 0:
            raise DomainError(
                f"log_mgamma(beta={beta}, m={m}, a={a}): factor i={i} has "
                f"argument {arg} <= 0 (need a > (m-1)beta/2)"
            )
        total += float(gammaln(arg))
    return total


def log_mbeta(beta: float, m: int, a: float, b: float) -> float:
    """Log of the multivariate beta function ``Gamma_m(a) Gamma_m(b) / Gamma_m(a+b)``."""
    return log_mgamma(beta, m, a) + log_mgamma(beta, m, b) - log_mgamma(beta, m, a + b)


def log_stiefel_volume(beta: float, m: int, n: int) -> float:
    """Log volume of the Stiefel manifold of m x n matrices with orthonormal rows."""
    beta = _check_beta(beta)
    m = _check_dim(m)
    n = _check_dim(n)
    if m > n:
        raise DimensionError(f"Stiefel manifold needs m <= n, got m={m}, n={n}")
    return m * math.log(2.0) + m * n * beta / 2.0 * LOG_PI - log_mgamma(beta, m, n * beta / 2.0)


_TAU_PER_ROW = {1: 0, 2: -1, 4: -2, 8: -4}


def tau(beta: int, m: int) -> int:
    """The integer pi-exponent of the SVD Jacobian, as tabulated for beta in {1,2,4,8}."""
    m = _check_dim(m)
    if beta not in _TAU_PER_ROW:
        raise ParameterError(f"tau is tabulated only for beta in (1, 2, 4, 8), got {beta}")
    return _TAU_PER_ROW[int(beta)] * m


def log_phase_volume(beta: float, m: int) -> float:
    """Log of the SVD phase-ambiguity factor, ``m * (lnGamma(beta/2) - (beta/2) ln pi)``.

    Each singular pair is determined up to a unit of the algebra, i.e. a
    point of the sphere S^(beta-1) with area ``2 pi^(beta/2) / Gamma(beta/2)``;
    the factor 2 is carried separately.  Equals ``tau(beta, m) * ln(pi)`` for
    beta in {1, 2, 4}; for beta = 8 the table value omits ``Gamma(4)^m``.
    """
    beta = _check_beta(beta)
    m = _check_dim(m)
    return m * (float(gammaln(beta / 2.0)) - beta / 2.0 * LOG_PI)
