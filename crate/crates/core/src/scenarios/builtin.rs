use serde::{Deserialize, Serialize};

use super::gaussian::{gaussian_classification_scenario_with, gaussian_regression_scenario_with, DensityBackend};
use super::lower::{lower_bound_crossentropy_instance, lower_bound_regression_instance};
use super::scenario::Scenario;
use crate::error::{Error, Result};

/// Default sampling seed for the Gaussian builtins.
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_GAUSS_REG_SAMPLES: usize = 150;
pub const DEFAULT_GAUSS_XENT_SAMPLES: usize = 50;

/// Knobs shared by the built-in generators; unused ones are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltinParams {
    /// Number of sources for `lower-xent` (default 3).
    pub p: Option<usize>,
    pub seed: u64,
    /// Draws per domain (`gauss-reg`) or per class and domain (`gauss-xent`).
    pub n: Option<usize>,
    pub backend: DensityBackend,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self { p: None, seed: DEFAULT_SEED, n: None, backend: DensityBackend::Exact }
    }
}

pub const BUILTINS: [(&str, &str); 4] = [
    ("lower-reg", "two point masses, squared loss; convex combinations lose 1/4"),
    ("lower-xent", "p point masses, cross-entropy; convex combinations lose log p"),
    ("gauss-reg", "two mixtures of four unit Gaussians, linear regressors for x1^2 + x2^2"),
    ("gauss-xent", "three rotated 3-class Gaussian domains, logistic regressors"),
];

pub fn builtin(name: &str, params: &BuiltinParams) -> Result<Scenario> {
    match name {
        "lower-reg" => Ok(lower_bound_regression_instance()),
        "lower-xent" => lower_bound_crossentropy_instance(params.p.unwrap_or(3)),
        "gauss-reg" => gaussian_regression_scenario_with(
            params.seed,
            params.n.unwrap_or(DEFAULT_GAUSS_REG_SAMPLES),
            params.backend,
        ),
        "gauss-xent" => gaussian_classification_scenario_with(
            params.seed,
            params.n.unwrap_or(DEFAULT_GAUSS_XENT_SAMPLES),
            params.backend,
        ),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}
