"""Analysis toolkit for crosstalk-coupled nonlinear multi-branch transmitters.

Closed-form error and spectral-efficiency figures built on a Gaussian
linearization of the amplifier feedback loop, exact power back-off and
precoder optimizers, an any-branch-count generalization, and a
Monte-Carlo oracle that validates all of it against the exact
nonlinear system.
"""

from .errors import (
    BoundaryEvaluationError,
    ConfigError,
    ConvergenceError,
    DegeneratePolynomialError,
    DirtyTxError,
    FeedbackDivergenceError,
    NoFiniteOptimumError,
    NumericalError,
    RootStructureError,
    SingularCouplingError,
)
from .model import (
    BussgangGainWarning,
    BussgangModel,
    HardwareConfig,
    ModelValidityWarning,
    SignalSpec,
    build_model,
    bussgang_gains,
    coupling_matrix,
    distortion_covariance,
    effective_linear_gain,
    fourth_moment_matrix,
    internal_covariance,
    linear_output_covariance,
    sixth_moment_matrix,
    unit_internal_covariance,
)
from .mxm import (
    HardwareConfigM,
    SignalSpecM,
    build_q_m,
    hardware_from_pair,
    minmax_backoff_m,
    mrt_variants_m,
    nmse_branches_m,
    signal_from_pair,
    simulate_batch_m,
)
from .montecarlo import (
    SampleBatch,
    bussgang_residual,
    covariance_mismatch,
    empirical_cdf_distance,
    empirical_moments,
    empirical_nmse,
    sample_inputs,
    simulate_batch,
    solve_feedback,
)
from .nmse import (
    BackoffSolution,
    ErrorTerms,
    NmseReport,
    approx_nmse1,
    error_covariance_diag,
    minmax_backoff,
    nmse_branches,
    nmse_second_derivative,
    siso_optimal_power,
)
from .polyroots import RootReport, real_roots, unique_positive_root
from .precoding import (
    ChannelSpec,
    EffectiveNoise,
    PrecoderSolution,
    achievable_se,
    conventional_mrt,
    distortion_aware_curve,
    distortion_aware_mrt,
    mrt_ray_curve,
    optimal_precoder,
    perturbation_se,
    sndr,
    sndr_matrix,
)
from .experiments import (
    EXPERIMENT_KINDS,
    ResultTable,
    config_digest,
    emit,
    load_config,
    render,
    run_experiment,
)
from .units import db_to_linear, dbm_to_watt, linear_to_db, watt_to_dbm
from .version import __version__

__all__ = [
    "__version__",
    "BackoffSolution",
    "BoundaryEvaluationError",
    "BussgangGainWarning",
    "BussgangModel",
    "ChannelSpec",
    "ConfigError",
    "ConvergenceError",
    "DegeneratePolynomialError",
    "DirtyTxError",
    "EXPERIMENT_KINDS",
    "EffectiveNoise",
    "ErrorTerms",
    "FeedbackDivergenceError",
    "HardwareConfig",
    "HardwareConfigM",
    "ModelValidityWarning",
    "NmseReport",
    "NoFiniteOptimumError",
    "NumericalError",
    "PrecoderSolution",
    "ResultTable",
    "RootReport",
    "RootStructureError",
    "SampleBatch",
    "SignalSpec",
    "SignalSpecM",
    "SingularCouplingError",
    "achievable_se",
    "approx_nmse1",
    "build_model",
    "build_q_m",
    "bussgang_gains",
    "bussgang_residual",
    "config_digest",
    "conventional_mrt",
    "coupling_matrix",
    "covariance_mismatch",
    "db_to_linear",
    "dbm_to_watt",
    "distortion_aware_curve",
    "distortion_aware_mrt",
    "distortion_covariance",
    "effective_linear_gain",
    "emit",
    "empirical_cdf_distance",
    "empirical_moments",
    "empirical_nmse",
    "error_covariance_diag",
    "fourth_moment_matrix",
    "hardware_from_pair",
    "internal_covariance",
    "linear_output_covariance",
    "linear_to_db",
    "load_config",
    "minmax_backoff",
    "minmax_backoff_m",
    "mrt_ray_curve",
    "mrt_variants_m",
    "nmse_branches",
    "nmse_branches_m",
    "nmse_second_derivative",
    "optimal_precoder",
    "perturbation_se",
    "real_roots",
    "render",
    "run_experiment",
    "sample_inputs",
    "signal_from_pair",
    "simulate_batch",
    "simulate_batch_m",
    "siso_optimal_power",
    "sixth_moment_matrix",
    "sndr",
    "sndr_matrix",
    "solve_feedback",
    "unique_positive_root",
    "unit_internal_covariance",
    "watt_to_dbm",
]
