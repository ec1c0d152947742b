use serde::{Deserialize, Serialize};

use crate::domain_model::{log_sum_exp, DiscreteJointDistribution, GaussianMixtureDensity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub x: Vec<f64>,
    /// Class index in classification samples, the real label otherwise.
    pub y: f64,
}

/// Draws from one source domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSample {
    pub points: Vec<SamplePoint>,
    pub source: usize,
    pub seed: u64,
}

impl EmpiricalSample {
    pub fn new(points: Vec<SamplePoint>, source: usize, seed: u64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        let d = points[0].x.len();
        if d == 0 || points.iter().any(|p| p.x.len() != d) {
            return Err(Error::ShapeMismatch("sample points differ in dimension".into()));
        }
        Ok(Self { points, source, seed })
    }

    pub fn dims(&self) -> usize {
        self.points[0].x.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.x.clone()).collect()
    }
}

/// Regular grid over a box; `y` must be a class index below `n_labels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub bins: usize,
    pub n_labels: usize,
}

impl HistogramSpec {
    pub fn n_cells_x(&self) -> usize {
        self.bins.pow(self.lo.len() as u32)
    }

    /// Cell of `x`; points outside the box go to the nearest edge cell.
    pub fn cell(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for ((v, lo), hi) in x.iter().zip(&self.lo).zip(&self.hi) {
            let t = ((v - lo) / (hi - lo) * self.bins as f64).floor();
            let b = t.clamp(0.0, (self.bins - 1) as f64) as usize;
            idx = idx * self.bins + b;
        }
        idx
    }
}

/// Additively smoothed histogram `(count + ε_s) / (N + ε_s · cells)` over
/// input cells × labels.
pub fn estimate_density_histogram(
    sample: &EmpiricalSample,
    spec: &HistogramSpec,
    smoothing: f64,
) -> Result<DiscreteJointDistribution> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if spec.bins == 0 || spec.n_labels == 0 || spec.lo.len() != sample.dims() || spec.hi.len() != spec.lo.len() {
        return Err(Error::InvalidArgument("histogram grid does not fit the sample".into()));
    }
    if spec.lo.iter().zip(&spec.hi).any(|(l, h)| !(h > l)) {
        return Err(Error::InvalidArgument("histogram box is empty".into()));
    }
    if !(smoothing >= 0.0 && smoothing.is_finite()) {
        return Err(Error::InvalidArgument(format!("smoothing must be nonnegative, got {smoothing}")));
    }
    let n_x = spec.n_cells_x();
    let mut counts = vec![0.0; n_x * spec.n_labels];
    for p in &sample.points {
        let y = p.y;
        if !(y >= 0.0 && y.fract() == 0.0 && (y as usize) < spec.n_labels) {
            return Err(Error::InvalidArgument(format!("label {y} is not a class index below {}", spec.n_labels)));
        }
        counts[spec.cell(&p.x) * spec.n_labels + y as usize] += 1.0;
    }
    let denom = sample.len() as f64 + smoothing * counts.len() as f64;
    let probs = counts.iter().map(|c| (c + smoothing) / denom).collect();
    DiscreteJointDistribution::new(n_x, spec.n_labels, probs)
}

/// Gaussian kernel density estimate: an equal-weight mixture of isotropic
/// Gaussians with variance `bandwidth²` centered at the sample points.
pub fn estimate_density_kde(points: &[Vec<f64>], bandwidth: f64) -> Result<GaussianMixtureDensity> {
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {bandwidth}")));
    }
    GaussianMixtureDensity::uniform(points.to_vec(), bandwidth * bandwidth)
}

/// Leave-one-out log-likelihood of a Gaussian KDE.
pub fn loo_log_likelihood(points: &[Vec<f64>], bandwidth: f64) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::EmptySample);
    }
    let kde = estimate_density_kde(points, bandwidth)?;
    let comps = kde.components();
    let n = points.len();
    let mut total = 0.0;
    let mut logs = Vec::with_capacity(n - 1);
    for (i, x) in points.iter().enumerate() {
        logs.clear();
        logs.extend(comps.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c.log_density(x)));
        total += log_sum_exp(&logs) - ((n - 1) as f64).ln();
    }
    Ok(total)
}

/// Bandwidth from `candidates` with the best leave-one-out log-likelihood
/// (first on ties).
pub fn cv_bandwidth(points: &[Vec<f64>], candidates: &[f64]) -> Result<f64> {
    let mut best = (f64::NEG_INFINITY, None);
    for &h in candidates {
        let ll = loo_log_likelihood(points, h)?;
        if ll > best.0 {
            best = (ll, Some(h));
        }
    }
    best.1.ok_or_else(|| Error::InvalidArgument("no bandwidth candidates".into()))
}

/// Log-spaced default candidates scaled by the sample's spread.
pub fn default_bandwidth_grid(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len().max(1) as f64;
    let d = points.first().map_or(1, Vec::len);
    let mut spread = 0.0;
    for k in 0..d {
        let mean = points.iter().map(|p| p[k]).sum::<f64>() / n;
        spread += points.iter().map(|p| (p[k] - mean).powi(2)).sum::<f64>() / n;
    }
    let sigma = (spread / d as f64).sqrt().max(1e-3);
    // Scott's rule as the center of the grid.
    let scott = sigma * n.powf(-1.0 / (d as f64 + 4.0));
    (-4..=4).map(|i| scott * 2f64.powf(i as f64 / 2.0)).collect()
}
