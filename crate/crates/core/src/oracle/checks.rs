//! Numerical checks of a DC decomposition at random points: the `u − v`
//! identity, midpoint convexity of `u_k` and `v_k`, and `∇v_k` against
//! central differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{convexity_probe, edge_direction, finite_diff_directional, CONVEXITY_TOL};
use crate::dc_solver::DcProblem;
use crate::domain_model::SimplexVector;
use crate::error::Result;
use crate::predictors::expected_loss;

pub const IDENTITY_TOL: f64 = 1e-10;
pub const GRADIENT_TOL: f64 = 1e-5;
pub const GRADIENT_STEP: f64 = 1e-6;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub worst: f64,
    pub tol: f64,
    pub passes: bool,
}

impl CheckReport {
    fn new(name: &str, trials: usize, worst: f64, tol: f64) -> Self {
        // NaN never passes.
        Self { name: name.into(), trials, worst, tol, passes: worst <= tol }
    }
}

/// Random point bounded away from the faces: `0.9·Dir(1) + 0.1·uniform`.
pub fn interior_point<R: Rng + ?Sized>(p: usize, rng: &mut R) -> SimplexVector {
    let d = SimplexVector::dirichlet(p, rng);
    SimplexVector::new(d.iter().map(|v| 0.9 * v + 0.1 / p as f64).collect()).expect("mixture of simplex points")
}

/// `|[u_k − v_k] − [L(D_k, h_z) − L(D_z, h_z)]|`, worst over `trials` random `(k, z)`.
pub fn decomposition_check(problem: &DcProblem, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = problem.p();
    let kind = problem.loss().kind;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let z = SimplexVector::dirichlet(p, &mut rng);
        let k = rng.random_range(0..p);
        let uv = problem.uv(&z)?;
        let h = problem.combined(&z)?;
        let losses =
            problem.sources().iter().map(|d| expected_loss(d, &h, kind, problem.labels())).collect::<Result<Vec<_>>>()?;
        let mixed: f64 = z.iter().zip(&losses).map(|(a, b)| a * b).sum();
        let err = ((uv.u[k] - uv.v[k]) - (losses[k] - mixed)).abs();
        worst = if err.is_nan() { f64::NAN } else { worst.max(err) };
    }
    Ok(CheckReport::new("decomposition", trials, worst, IDENTITY_TOL))
}

/// Midpoint probes of every `u_k` and `v_k` on `trials` random pairs.
pub fn uv_convexity_check(problem: &DcProblem, trials: usize, seed: u64) -> Result<CheckReport> {
    let p = problem.p();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..p {
        for which in [0, 1] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((2 * k + which) as u64) << 32);
            let report = convexity_probe(
                |z| {
                    let uv = problem.uv(z)?;
                    Ok(if which == 0 { uv.u[k] } else { uv.v[k] })
                },
                || (SimplexVector::dirichlet(p, &mut rng), SimplexVector::dirichlet(p, &mut rng)),
                trials,
            )?;
            worst = worst.max(report.worst_violation);
        }
    }
    Ok(CheckReport::new("convexity", trials, worst, CONVEXITY_TOL))
}

/// [`gradient_check_with`] against the problem's own `∇v_k`.
pub fn gradient_check(problem: &DcProblem, points: usize, seed: u64) -> Result<CheckReport> {
    gradient_check_with(problem, points, seed, |k, z| problem.grad_v(k, z))
}

/// Compares `grad(k, z)` along every edge direction `e_i − e_{i+1}` with a
/// central difference of `v_k`. Errors are relative to the largest
/// directional derivative at the point, floored at `max(1e-6, 1e-3·|v_k(z)|)`.
/// Below that floor a central difference with step 1e-6 is dominated by
/// cancellation error of order `ε·|v_k| / step`.
pub fn gradient_check_with<G>(problem: &DcProblem, points: usize, seed: u64, grad: G) -> Result<CheckReport>
where
    G: Fn(usize, &SimplexVector) -> Result<Vec<f64>>,
{
    let p = problem.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    if p < 2 {
        return Ok(CheckReport::new("gradient", 0, 0.0, GRADIENT_TOL));
    }
    let n_dirs = if p == 2 { 1 } else { p };
    for _ in 0..points {
        let z = interior_point(p, &mut rng);
        let k = rng.random_range(0..p);
        let g = grad(k, &z)?;
        let mut pairs = Vec::with_capacity(n_dirs);
        for i in 0..n_dirs {
            let j = (i + 1) % p;
            let fd = finite_diff_directional(|w| Ok(problem.uv(w)?.v[k]), &z, &edge_direction(p, i, j), GRADIENT_STEP)?;
            pairs.push((g[i] - g[j], fd));
        }
        let floor = (1e-3 * problem.uv(&z)?.v[k].abs()).max(1e-6);
        let scale = pairs.iter().map(|(a, fd)| a.abs().max(fd.abs())).fold(floor, f64::max);
        for (a, fd) in pairs {
            let err = (a - fd).abs() / scale;
            worst = if err.is_nan() { f64::NAN } else { worst.max(err) };
        }
    }
    Ok(CheckReport::new("gradient", points, worst, GRADIENT_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::Model;
    use crate::scenarios::random_discrete_scenario;

    #[test]
    fn checks_pass_on_random_instances() {
        for (model, seed) in [(Model::Regression, 1), (Model::Probability, 2)] {
            let prob = random_discrete_scenario(model, seed, 3, 4, 3).unwrap().problem(0.01).unwrap();
            assert!(decomposition_check(&prob, 50, 3).unwrap().passes);
            assert!(uv_convexity_check(&prob, 50, 4).unwrap().passes);
            assert!(gradient_check(&prob, 20, 5).unwrap().passes);
        }
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let prob = random_discrete_scenario(Model::Probability, 6, 3, 3, 2).unwrap().problem(0.01).unwrap();
        let report = gradient_check_with(&prob, 5, 1, |k, z| {
            let mut g = prob.grad_v(k, z)?;
            g[0] += 0.1;
            Ok(g)
        })
        .unwrap();
        assert!(!report.passes);
        assert_eq!(report.name, "gradient");
    }
}
