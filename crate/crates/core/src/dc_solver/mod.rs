//! The min-max problem over mixture weights, its difference-of-convex
//! decomposition, and the solvers built on it.
//!
//! With `K_z = D_z + ηU` and `J_z = Σ_k z_k D_k h_k + (ηU/p) Σ_k h_k`, the
//! combined predictor is `h_z = J_z / K_z`; both are affine in `z`.

mod balance;
mod problem;
mod solve;

pub use balance::{check_balance, fixed_point_iterate, fixed_point_map, BalanceReport, FixedPoint};
pub use problem::{DcProblem, UvValues};
pub use solve::{
    dca_solve, inner_solve, optimality_certificate, start_points, Certificate, DcDecomposition, InitialPoint,
    InnerResult, IterRecord, SolveFailure, SolveOutcome, SolveTrace, SolverConfig, StartSummary, StopReason,
};

/// `(u_k(z), v_k(z))` in model R.
pub fn uv_squared(problem: &DcProblem, k: usize, z: &crate::domain_model::SimplexVector) -> crate::Result<(f64, f64)> {
    if problem.model() != crate::predictors::Model::Regression {
        return Err(crate::Error::ModelMismatch("squared-loss decomposition needs model R".into()));
    }
    uv_at(problem, k, z)
}

/// `(u_k(z), v_k(z))` in model P.
pub fn uv_crossentropy(
    problem: &DcProblem,
    k: usize,
    z: &crate::domain_model::SimplexVector,
) -> crate::Result<(f64, f64)> {
    if problem.model() != crate::predictors::Model::Probability {
        return Err(crate::Error::ModelMismatch("cross-entropy decomposition needs model P".into()));
    }
    uv_at(problem, k, z)
}

fn uv_at(problem: &DcProblem, k: usize, z: &crate::domain_model::SimplexVector) -> crate::Result<(f64, f64)> {
    if k >= problem.p() {
        return Err(crate::Error::InvalidArgument(format!("domain index {k} out of range")));
    }
    let uv = problem.uv(z)?;
    Ok((uv.u[k], uv.v[k]))
}
