"""Higher-order capacity statistics of amplify-and-forward multihop links."""

from .aux_z import GlConfig, kernel_identity_check, z1_closed, z_gl, z_gl_extrapolated, z_kernel, z_order0, z_series_oracle
from .capacity import HosResult, QuadratureConfig, ergodic_capacity, hos_moment, hos_moment_custom_end
from .errors import (
    AfhosError,
    ConfigError,
    ConvergenceError,
    DegenerateVarianceError,
    DomainError,
    InconsistencyError,
    OracleRangeError,
    UnsupportedModelError,
)
from .fading import (
    CustomHop,
    GammaHop,
    GeneralizedGammaHop,
    HopModel,
    LinkConfig,
    deterministic_hop,
    link_mgf_product,
    recip_mgf,
    recip_mgf_deriv,
)
from .metrics import (
    CapacityMetrics,
    aod,
    capacity_metrics,
    central_kurtosis,
    central_skewness,
    kurtosis_paper,
    metrics_from_moments,
    reliability,
    skewness_paper,
    variance,
)
from .montecarlo import McConfig, McEstimate, mc_hos, mc_hos_orders, sample_end_to_end, sample_hop_snr
from .special_functions import (
    DEFAULT_ACCURACY,
    EULER_GAMMA,
    AccuracyTarget,
    MathConstants,
    bessel_k,
    exp_integral_ei,
    extended_incomplete_gamma,
    kummer_1f1_b1,
    log_gamma,
    polygamma,
)

__version__ = "0.1.0"
