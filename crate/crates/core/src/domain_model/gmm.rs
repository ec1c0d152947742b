use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::renyi::log_sum_exp;
use super::simplex::SimplexVector;
use crate::error::{Error, Result};

/// One isotropic Gaussian component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    pub variance: f64,
}

impl GaussianComponent {
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.mean.len() as f64;
        let sq: f64 = x.iter().zip(&self.mean).map(|(a, m)| (a - m) * (a - m)).sum();
        -0.5 * sq / self.variance - 0.5 * d * (2.0 * PI * self.variance).ln()
    }
}

/// Mixture of isotropic Gaussians with analytic density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureDensity {
    dims: usize,
    components: Vec<GaussianComponent>,
    weights: SimplexVector,
}

impl GaussianMixtureDensity {
    pub fn new(components: Vec<GaussianComponent>, weights: SimplexVector) -> Result<Self> {
        let dims = components
            .first()
            .map(|c| c.mean.len())
            .ok_or_else(|| Error::InvalidArgument("mixture needs at least one component".into()))?;
        if dims == 0 || components.iter().any(|c| c.mean.len() != dims) {
            return Err(Error::ShapeMismatch("component means differ in dimension".into()));
        }
        if components.iter().any(|c| !(c.variance > 0.0 && c.variance.is_finite())) {
            return Err(Error::InvalidArgument("variances must be positive".into()));
        }
        if weights.len() != components.len() {
            return Err(Error::ShapeMismatch("one weight per component required".into()));
        }
        Ok(Self { dims, components, weights })
    }

    /// Equal-weight mixture sharing one variance.
    pub fn uniform(means: Vec<Vec<f64>>, variance: f64) -> Result<Self> {
        let n = means.len();
        let components = means.into_iter().map(|mean| GaussianComponent { mean, variance }).collect();
        Self::new(components, SimplexVector::uniform(n.max(1)))
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn weights(&self) -> &SimplexVector {
        &self.weights
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .components
            .iter()
            .zip(self.weights.iter())
            .filter(|(_, w)| **w > 0.0)
            .map(|(c, w)| w.ln() + c.log_density(x))
            .collect();
        log_sum_exp(&terms)
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.log_density(x).exp()
    }

    /// Draws one point and returns it with its component index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, usize) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut idx = self.components.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                idx = i;
                break;
            }
        }
        let c = &self.components[idx];
        let sd = c.variance.sqrt();
        let x = c
            .mean
            .iter()
            .map(|m| {
                let z: f64 = StandardNormal.sample(rng);
                m + sd * z
            })
            .collect();
        (x, idx)
    }
}
