"""Generalized inverse Gaussian sampling via adaptive rejection envelopes."""

__version__ = "0.1.0"

from .envelope import (
    CutoffSearchConfig,
    Envelope,
    StandardParams,
    build_envelope,
    count_cutoffs_curve,
    find_cutoffs_by_count,
    find_cutoffs_by_rate,
)
from .errors import (
    ConvergenceError,
    CutoffCapExceededError,
    CutoffCountUnattainableError,
    DomainError,
    GigSamplerError,
    UnsupportedParametersError,
)
from .generator import (
    DerivedForm,
    GigParams,
    GigQuadratureCdf,
    GigSampler,
    GofReport,
    SamplerConfig,
    SetupInfo,
    check_proposition1,
    derive_form,
    gig_log_pdf,
    gig_pdf,
    sample_gig,
)
from .rejection import (
    AcceptanceStats,
    measure_acceptance,
    sample_quasi_density,
    sample_segment,
    sample_truncated_exponential,
)
from .special import (
    GammaShapeRate,
    gamma_log_upper_cdf,
    gamma_quantile_log_upper,
    gig_log_norm_constant,
    inv_gamma_cdf,
    inv_gamma_log_cdf,
    inv_gamma_quantile,
    log_gamma,
)
from .truncated import (
    TruncatedGammaSpec,
    sample_truncated_gamma,
    sample_truncated_inv_gamma,
)

__all__ = [
    "AcceptanceStats",
    "ConvergenceError",
    "CutoffCapExceededError",
    "CutoffCountUnattainableError",
    "CutoffSearchConfig",
    "DerivedForm",
    "DomainError",
    "Envelope",
    "GammaShapeRate",
    "GigParams",
    "GigQuadratureCdf",
    "GigSampler",
    "GigSamplerError",
    "GofReport",
    "SamplerConfig",
    "SetupInfo",
    "StandardParams",
    "TruncatedGammaSpec",
    "UnsupportedParametersError",
    "build_envelope",
    "check_proposition1",
    "count_cutoffs_curve",
    "derive_form",
    "find_cutoffs_by_count",
    "find_cutoffs_by_rate",
    "gamma_log_upper_cdf",
    "gamma_quantile_log_upper",
    "gig_log_norm_constant",
    "gig_log_pdf",
    "gig_pdf",
    "inv_gamma_cdf",
    "inv_gamma_log_cdf",
    "inv_gamma_quantile",
    "log_gamma",
    "measure_acceptance",
    "sample_gig",
    "sample_quasi_density",
    "sample_segment",
    "sample_truncated_exponential",
    "sample_truncated_gamma",
    "sample_truncated_inv_gamma",
]
