//! Synthetic Gaussian-mixture scenarios in two dimensions.
//!
//! Continuous sources are reduced to tables over the pooled sample `S`: each
//! `D_k` is its density on `S`, normalized over `S`.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::estimate::{cv_bandwidth, default_bandwidth_grid, estimate_density_kde};
use super::scenario::Scenario;
use crate::domain_model::{log_sum_exp, DiscreteJointDistribution, GaussianComponent, GaussianMixtureDensity};
use crate::error::{Error, Result};
use crate::predictors::{Hypothesis, LossKind, Model, ProbabilityHypothesis, RegressionHypothesis};

pub const GAUSS_REG_MEANS: [[f64; 2]; 4] = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
pub const GAUSS_XENT_VARIANCES: [f64; 3] = [0.05, 0.05, 0.3];
pub const LOGISTIC_ITERS: usize = 500;
pub const LOGISTIC_STEP: f64 = 0.1;

/// How source densities are evaluated on the pooled sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityBackend {
    #[default]
    Exact,
    /// Gaussian KDE fit to each domain's own draws; `None` selects the
    /// bandwidth by leave-one-out likelihood.
    Kde { bandwidth: Option<f64> },
}

/// The regression labeling function `x_1² + x_2²`.
pub fn gauss_reg_label(x: &[f64]) -> f64 {
    x[0] * x[0] + x[1] * x[1]
}

fn normalized_table_from_logs(logs: &[f64], n_x: usize, n_y: usize) -> Result<DiscreteJointDistribution> {
    let lse = log_sum_exp(logs);
    DiscreteJointDistribution::from_weights(n_x, n_y, logs.iter().map(|l| (l - lse).exp()).collect())
}

fn fit_log_density(points: &[Vec<f64>], backend: DensityBackend, exact: &GaussianMixtureDensity) -> Result<GaussianMixtureDensity> {
    match backend {
        DensityBackend::Exact => Ok(exact.clone()),
        DensityBackend::Kde { bandwidth } => {
            let h = match bandwidth {
                Some(h) => h,
                None => cv_bandwidth(points, &default_bandwidth_grid(points))?,
            };
            estimate_density_kde(points, h)
        }
    }
}

/// Ordinary least squares with an intercept; returns `(b, w_1, ..., w_d)`.
pub fn least_squares(xs: &[Vec<f64>], ys: &[f64]) -> Result<Vec<f64>> {
    let d = xs.first().map_or(0, Vec::len);
    if xs.len() <= d || xs.len() != ys.len() {
        return Err(Error::InvalidArgument("least squares needs more points than features".into()));
    }
    let a = DMatrix::from_fn(xs.len(), d + 1, |i, j| if j == 0 { 1.0 } else { xs[i][j - 1] });
    let b = DVector::from_column_slice(ys);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    let sol = ata
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("design matrix is rank deficient".into()))?
        .solve(&atb);
    Ok(sol.iter().copied().collect())
}

/// `D_1 = mix(g_1, g_2, g_3)`, `D_2 = mix(g_2, g_3, g_4)` with unit variance,
/// labels `x_1² + x_2²`, one linear least-squares regressor per domain.
pub fn gaussian_regression_scenario(seed: u64, n_samples: usize) -> Result<Scenario> {
    gaussian_regression_scenario_with(seed, n_samples, DensityBackend::Exact)
}

pub fn gaussian_regression_scenario_with(seed: u64, n_samples: usize, backend: DensityBackend) -> Result<Scenario> {
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples per domain, got {n_samples}")));
    }
    let g: Vec<Vec<f64>> = GAUSS_REG_MEANS.iter().map(|m| m.to_vec()).collect();
    let domains = [
        GaussianMixtureDensity::uniform(vec![g[0].clone(), g[1].clone(), g[2].clone()], 1.0)?,
        GaussianMixtureDensity::uniform(vec![g[1].clone(), g[2].clone(), g[3].clone()], 1.0)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<Vec<f64>>> =
        domains.iter().map(|d| (0..n_samples).map(|_| d.sample(&mut rng).0).collect()).collect();
    let pooled: Vec<Vec<f64>> = draws.concat();
    let n = pooled.len();
    let labels: Vec<f64> = pooled.iter().map(|x| gauss_reg_label(x)).collect();

    let mut sources = Vec::new();
    let mut hypotheses: Vec<Hypothesis> = Vec::new();
    for (k, dens) in domains.iter().enumerate() {
        let own_labels: Vec<f64> = draws[k].iter().map(|x| gauss_reg_label(x)).collect();
        let beta = least_squares(&draws[k], &own_labels)?;
        let values = pooled.iter().map(|x| beta[0] + beta[1] * x[0] + beta[2] * x[1]).collect();
        hypotheses.push(RegressionHypothesis::new(values)?.into());

        let fitted = fit_log_density(&draws[k], backend, dens)?;
        let diag: Vec<f64> = pooled.iter().map(|x| fitted.log_density(x)).collect();
        let mut logs = vec![f64::NEG_INFINITY; n * n];
        for (i, l) in diag.iter().enumerate() {
            logs[i * n + i] = *l;
        }
        sources.push(normalized_table_from_logs(&logs, n, n)?);
    }
    Scenario::new(
        "gauss-reg",
        Model::Regression,
        LossKind::Squared,
        None,
        labels,
        sources,
        hypotheses,
        None,
        format!("seed {seed}, {n_samples} draws per domain, {backend:?} densities on the pooled sample"),
    )
}

/// Random 2×2 orthonormal matrix from the QR factorization of a Gaussian
/// matrix, with signs fixed so `R` has a positive diagonal.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<f64> {
    let mut draw = || -> f64 { StandardNormal.sample(rng) };
    let a = Matrix2::new(draw(), draw(), draw(), draw());
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..2 {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn softmax_row(w: &[[f64; 3]], x: &[f64]) -> Vec<f64> {
    let logits: Vec<f64> = w.iter().map(|c| c[0] + c[1] * x[0] + c[2] * x[1]).collect();
    let lse = log_sum_exp(&logits);
    logits.iter().map(|l| (l - lse).exp()).collect()
}

/// Full-batch gradient descent on the mean multinomial cross-entropy,
/// starting from zero weights. Returns one `(b, w_1, w_2)` row per class.
pub fn train_logistic(xs: &[Vec<f64>], ys: &[usize], n_classes: usize, iters: usize, step: f64) -> Vec<[f64; 3]> {
    let mut w = vec![[0.0; 3]; n_classes];
    let n = xs.len() as f64;
    for _ in 0..iters {
        let mut grad = vec![[0.0; 3]; n_classes];
        for (x, &y) in xs.iter().zip(ys) {
            let p = softmax_row(&w, x);
            for c in 0..n_classes {
                let r = p[c] - if c == y { 1.0 } else { 0.0 };
                grad[c][0] += r;
                grad[c][1] += r * x[0];
                grad[c][2] += r * x[1];
            }
        }
        for (wc, gc) in w.iter_mut().zip(&grad) {
            for (a, b) in wc.iter_mut().zip(gc) {
                *a -= step * b / n;
            }
        }
    }
    w
}

/// Three domains × three classes. Class means are uniform in `[−2, 2]²`;
/// domain `d` uses `Q^d μ_c` for one random orthonormal `Q`, with variances
/// 0.05, 0.05 and 0.3. One logistic regressor per domain.
pub fn gaussian_classification_scenario(seed: u64, n_per_category: usize) -> Result<Scenario> {
    gaussian_classification_scenario_with(seed, n_per_category, DensityBackend::Exact)
}

pub fn gaussian_classification_scenario_with(
    seed: u64,
    n_per_category: usize,
    backend: DensityBackend,
) -> Result<Scenario> {
    if n_per_category < 50 {
        return Err(Error::InvalidArgument(format!("need at least 50 draws per category, got {n_per_category}")));
    }
    const P: usize = 3;
    const C: usize = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<nalgebra::Vector2<f64>> = (0..C)
        .map(|_| nalgebra::Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
        .collect();
    let q = random_orthonormal(&mut rng);
    let mut means = vec![vec![vec![0.0; 2]; C]; P];
    let mut qd = Matrix2::identity();
    for dm in means.iter_mut() {
        for (c, m) in dm.iter_mut().enumerate() {
            let v = qd * base[c];
            *m = vec![v[0], v[1]];
        }
        qd = q * qd;
    }

    let mut draws: Vec<Vec<(Vec<f64>, usize)>> = Vec::with_capacity(P);
    for d in 0..P {
        let sd = GAUSS_XENT_VARIANCES[d].sqrt();
        let mut pts = Vec::with_capacity(C * n_per_category);
        for c in 0..C {
            for _ in 0..n_per_category {
                let e0: f64 = StandardNormal.sample(&mut rng);
                let e1: f64 = StandardNormal.sample(&mut rng);
                pts.push((vec![means[d][c][0] + sd * e0, means[d][c][1] + sd * e1], c));
            }
        }
        draws.push(pts);
    }
    let pooled: Vec<Vec<f64>> = draws.iter().flatten().map(|(x, _)| x.clone()).collect();
    let n = pooled.len();

    let mut sources = Vec::with_capacity(P);
    let mut hypotheses: Vec<Hypothesis> = Vec::with_capacity(P);
    for d in 0..P {
        let xs: Vec<Vec<f64>> = draws[d].iter().map(|(x, _)| x.clone()).collect();
        let ys: Vec<usize> = draws[d].iter().map(|(_, y)| *y).collect();
        let w = train_logistic(&xs, &ys, C, LOGISTIC_ITERS, LOGISTIC_STEP);
        let values: Vec<f64> = pooled.iter().flat_map(|x| softmax_row(&w, x)).collect();
        hypotheses.push(ProbabilityHypothesis::new(n, C, values)?.into());

        let mut logs = vec![0.0; n * C];
        for c in 0..C {
            let exact = GaussianMixtureDensity::new(
                vec![GaussianComponent { mean: means[d][c].clone(), variance: GAUSS_XENT_VARIANCES[d] }],
                crate::domain_model::SimplexVector::uniform(1),
            )?;
            let class_pts: Vec<Vec<f64>> = draws[d].iter().filter(|(_, y)| *y == c).map(|(x, _)| x.clone()).collect();
            let fitted = fit_log_density(&class_pts, backend, &exact)?;
            for (i, x) in pooled.iter().enumerate() {
                logs[i * C + c] = fitted.log_density(x) - (C as f64).ln();
            }
        }
        sources.push(normalized_table_from_logs(&logs, n, C)?);
    }
    Scenario::new(
        "gauss-xent",
        Model::Probability,
        LossKind::CrossEntropy,
        None,
        Vec::new(),
        sources,
        hypotheses,
        None,
        format!(
            "seed {seed}, {n_per_category} draws per class and domain, {backend:?} densities; \
             class means uniform in [-2, 2]^2, rotation from QR of a Gaussian matrix"
        ),
    )
}
