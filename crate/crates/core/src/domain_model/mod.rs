//! Finite probability spaces, simplex vectors, mixtures, Rényi divergences
//! and guarantee-bound calculators.

mod bounds;
mod distribution;
mod gmm;
mod renyi;
mod simplex;

pub use bounds::{smoothing_delta, guarantee_bound, mixture_bound, GuaranteeReport};
pub use distribution::{mixture, DiscreteJointDistribution};
pub use gmm::{GaussianComponent, GaussianMixtureDensity};
pub use renyi::{epsilon_target, renyi_d_alpha, renyi_sup_ratio};
pub use simplex::{SimplexVector, CLAMP_TOL, RENORM_TOL};

pub(crate) use renyi::log_sum_exp;


/// `D(x) = Σ_y D(x, y)`.
pub fn marginal_x(d: &DiscreteJointDistribution) -> Vec<f64> {
    d.marginal_x()
}

pub fn conditional_y_given_x(d: &DiscreteJointDistribution, x: usize) -> crate::Result<SimplexVector> {
    d.conditional_y_given_x(x)
}
