"""Detection of a single mean shift in one-dimensional Gaussian process data."""

from .covariance import CovOperator, build_cov, quad_form, sample_chol, solve, tau
from .detectors import (
    ChangeWindow,
    DetectionResult,
    GlrtScan,
    cusum,
    gbeta,
    glrt,
    glrt_general,
    plugin_glrt,
    sign_vector,
    threshold_cusum,
    threshold_glrt,
)
from .errors import ConditioningError, EstimationError, ParameterError, UnsupportedOperation
from .estimation import FitResult, FixedRho, GridMLE, Oracle, estimate, fit_fixed_rho, fit_grid_mle, gaussian_loglik
from .kernels import Domain, Family, KernelSpec, eval_cov, eval_spectral, long_run_variance, toeplitz_generator_at
from .sim import AucSummary, DetectorChoice, RocCurve, TrialConfig, gen_trial, rate_curve, roc_auc, run_auc_experiment

__version__ = "0.1.0"
