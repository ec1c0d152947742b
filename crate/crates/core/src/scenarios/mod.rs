//! Problem generators, density estimators, scenario files and the
//! robustness sweep over target mixtures.

mod builtin;
mod estimate;
mod gaussian;
mod lower;
mod random;
mod scenario;
mod sweep;

pub use builtin::{builtin, BuiltinParams, BUILTINS, DEFAULT_SEED, DEFAULT_GAUSS_REG_SAMPLES, DEFAULT_GAUSS_XENT_SAMPLES};
pub use estimate::{
    cv_bandwidth, default_bandwidth_grid, estimate_density_histogram, estimate_density_kde, loo_log_likelihood,
    EmpiricalSample, HistogramSpec, SamplePoint,
};
pub use gaussian::{
    gauss_reg_label, gaussian_classification_scenario, gaussian_classification_scenario_with,
    gaussian_regression_scenario, gaussian_regression_scenario_with, least_squares, random_orthonormal,
    train_logistic, DensityBackend, GAUSS_REG_MEANS, GAUSS_XENT_VARIANCES, LOGISTIC_ITERS, LOGISTIC_STEP,
};
pub use lower::{lower_bound_crossentropy_instance, lower_bound_regression_instance};
pub use random::random_discrete_scenario;
pub use scenario::{
    default_targets, HypothesisFile, HypothesisValues, LossFile, NamedTarget, Scenario, ScenarioFile, SourceFile,
    TargetFile,
};
pub use sweep::{combined_hypothesis, default_lambda_resolution, fmt_csv, robustness_sweep, Combiner, SweepRow, SweepTable};
