use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `[(ε + δ)·d_α]^((α-1)/α) · M^(1/α)`: loss bound on a target at Rényi
/// distance `d_α` from the family the guarantee holds on.
pub fn guarantee_bound(epsilon: f64, delta: f64, d_alpha: f64, m: f64, alpha: f64) -> Result<f64> {
    if !(epsilon >= 0.0 && delta >= 0.0 && d_alpha >= 0.0) {
        return Err(Error::InvalidArgument("epsilon, delta and d_alpha must be >= 0".into()));
    }
    if !(m > 0.0) || !(alpha > 1.0) {
        return Err(Error::InvalidArgument("need M > 0 and alpha > 1".into()));
    }
    Ok(((epsilon + delta) * d_alpha).powf((alpha - 1.0) / alpha) * m.powf(1.0 / alpha))
}

/// Inputs and value of a guarantee bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub d_alpha: f64,
    pub bound_value: f64,
}

impl GuaranteeReport {
    pub fn new(epsilon: f64, delta: f64, d_alpha: f64, m: f64, alpha: f64) -> Result<Self> {
        let bound_value = guarantee_bound(epsilon, delta, d_alpha, m, alpha)?;
        Ok(Self { alpha, epsilon, delta, m, d_alpha, bound_value })
    }
}

/// Guarantee on any mixture target, `ε + δ`.
pub fn mixture_bound(epsilon: f64, delta: f64) -> f64 {
    epsilon + delta
}

/// Slack `δ` implied by the solver parameters: the proof sets
/// `η = δ/(2M)` and `η' = δ/2`, so `δ = 2ηM` is reported for a given `η`.
pub fn smoothing_delta(eta: f64, m: f64) -> f64 {
    2.0 * eta * m
}
