"""Matrix-variate Pearson type II and beta type I distributions over the real
normed division algebras (real, complex, quaternion; octonion scalars and
spectral densities)."""

__version__ = "0.1.0"

from .algebra import (
    DenseMatrix,
    DivisionScalar,
    HermitianPD,
    SVDResult,
    adjoint,
    cholesky,
    complex_embed,
    complex_unembed,
    gram,
    herm_eigenvalues,
    logdet_hpd,
    matmul,
    mul_scalars,
    svd,
)
from .densities import (
    BetaIParams,
    PearsonIIParams,
    SpectralConfig,
    beta1_logpdf,
    change_of_variables_check,
    mmbeta1_logpdf,
    mmpearson2_logpdf,
    pearson2_logpdf,
    pearson2_logpdf_dual,
    spectral_log_constant,
    spectral_logpdf,
    spectral_logpdf_values,
)
from .errors import *  # noqa: F401,F403
from .samplers import (
    EllipticalGenerator,
    SpectralDraws,
    WishartParams,
    sample_beta1,
    sample_chi2beta,
    sample_mmpearson2,
    sample_normal,
    sample_pearson2,
    sample_spectral,
    sample_wishart,
)
from .special import log_mbeta, log_mgamma, log_phase_volume, log_stiefel_volume, tau
