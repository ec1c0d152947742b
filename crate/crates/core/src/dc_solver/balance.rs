use serde::{Deserialize, Serialize};

use super::problem::DcProblem;
use crate::domain_model::SimplexVector;
use crate::error::{Error, Result};

/// Per-domain slack `s_k = L(D_k, h_z) − Σ_j z_j L(D_j, h_z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub slacks: Vec<f64>,
    pub max_slack: f64,
    pub eta_prime: f64,
    pub passes: bool,
}

pub fn check_balance(problem: &DcProblem, z: &SimplexVector, eta_prime: f64) -> Result<BalanceReport> {
    let losses = problem.domain_losses(z)?;
    let avg: f64 = z.iter().zip(&losses).map(|(a, b)| a * b).sum();
    let slacks: Vec<f64> = losses.iter().map(|l| l - avg).collect();
    let max_slack = slacks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(BalanceReport { passes: max_slack <= eta_prime, slacks, max_slack, eta_prime })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub z: SimplexVector,
    pub residual: f64,
    pub iters: usize,
    pub converged: bool,
}

impl FixedPoint {
    /// `NoConvergence` unless the residual tolerance was met.
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence { iters: self.iters, residual: self.residual })
        }
    }
}

/// `Φ(z)_k = (z_k L_k + η'/p) / (Σ_j z_j L_j + η')`.
pub fn fixed_point_map(problem: &DcProblem, z: &SimplexVector, eta_prime: f64) -> Result<SimplexVector> {
    let losses = problem.domain_losses(z)?;
    let p = losses.len() as f64;
    let denom: f64 = z.iter().zip(&losses).map(|(a, b)| a * b).sum::<f64>() + eta_prime;
    let next: Vec<f64> = z.iter().zip(&losses).map(|(a, l)| (a * l + eta_prime / p) / denom).collect();
    SimplexVector::new(next)
}

/// Plain iteration of the map above. Iteration is not guaranteed to
/// converge, so the best iterate is kept and `converged` reports the outcome.
pub fn fixed_point_iterate(
    problem: &DcProblem,
    z0: &SimplexVector,
    eta_prime: f64,
    max_iters: usize,
    tol: f64,
) -> Result<FixedPoint> {
    if !(eta_prime > 0.0) {
        return Err(Error::InvalidArgument(format!("eta_prime must be positive, got {eta_prime}")));
    }
    let mut z = z0.clone();
    let mut best = FixedPoint { z: z.clone(), residual: f64::INFINITY, iters: 0, converged: false };
    for it in 1..=max_iters {
        let next = fixed_point_map(problem, &z, eta_prime)?;
        let residual = next.max_abs_diff(&z);
        if residual < best.residual {
            best = FixedPoint { z: next.clone(), residual, iters: it, converged: residual <= tol };
        }
        if residual <= tol {
            return Ok(best);
        }
        z = next;
    }
    best.iters = max_iters;
    Ok(best)
}
