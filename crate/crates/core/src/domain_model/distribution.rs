use serde::{Deserialize, Serialize};

use super::simplex::{SimplexVector, RENORM_TOL};
use crate::error::{Error, Result};

/// Exact probability table over a finite `X × Y`, stored dense row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteJointDistribution {
    n_x: usize,
    n_y: usize,
    probs: Vec<f64>,
}

impl DiscreteJointDistribution {
    /// Builds a table from row-major probabilities. Totals within `1e-9` of
    /// one are renormalized; anything further off is rejected.
    pub fn new(n_x: usize, n_y: usize, probs: Vec<f64>) -> Result<Self> {
        if n_x == 0 || n_y == 0 {
            return Err(Error::InvalidDistribution("n_x and n_y must be positive".into()));
        }
        if probs.len() != n_x * n_y {
            return Err(Error::InvalidDistribution(format!(
                "expected {} entries, got {}",
                n_x * n_y,
                probs.len()
            )));
        }
        if let Some(i) = probs.iter().position(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entry ({}, {}) is negative or not finite",
                i / n_y,
                i % n_y
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > RENORM_TOL {
            return Err(Error::InvalidDistribution(format!("table sums to {total}")));
        }
        // Already-normalized tables pass through untouched so that reloading is exact.
        let probs = if (total - 1.0).abs() <= probs.len() as f64 * f64::EPSILON {
            probs
        } else {
            probs.into_iter().map(|p| p / total).collect()
        };
        Ok(Self { n_x, n_y, probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_x = rows.len();
        let n_y = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_y) {
            return Err(Error::InvalidDistribution("ragged probability rows".into()));
        }
        Self::new(n_x, n_y, rows.concat())
    }

    /// Normalizes nonnegative weights with a positive total.
    pub fn from_weights(n_x: usize, n_y: usize, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDistribution("weights must have a positive finite total".into()));
        }
        Self::new(n_x, n_y, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n_x: usize, n_y: usize) -> Result<Self> {
        let n = (n_x * n_y) as f64;
        Self::new(n_x, n_y, vec![1.0 / n; n_x * n_y])
    }

    pub fn point_mass(n_x: usize, n_y: usize, x: usize, y: usize) -> Result<Self> {
        if x >= n_x || y >= n_y {
            return Err(Error::InvalidArgument(format!("point ({x}, {y}) out of range")));
        }
        let mut probs = vec![0.0; n_x * n_y];
        probs[x * n_y + y] = 1.0;
        Self::new(n_x, n_y, probs)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.n_y + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.n_y..(x + 1) * self.n_y]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.probs.chunks(self.n_y).map(<[f64]>::to_vec).collect()
    }

    /// `D(x) = Σ_y D(x, y)`.
    pub fn marginal_x(&self) -> Vec<f64> {
        self.probs.chunks(self.n_y).map(|r| r.iter().sum()).collect()
    }

    pub fn conditional_y_given_x(&self, x: usize) -> Result<SimplexVector> {
        if x >= self.n_x {
            return Err(Error::InvalidArgument(format!("x = {x} out of range")));
        }
        let row = self.row(x);
        let mass: f64 = row.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroMarginal { x });
        }
        SimplexVector::new(row.iter().map(|p| p / mass).collect())
    }

    /// Points `(x, y)` carrying positive mass.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(move |(i, _)| (i / self.n_y, i % self.n_y))
    }
}

/// `D_λ(x, y) = Σ_k λ_k D_k(x, y)`.
pub fn mixture(
    lambda: &SimplexVector,
    sources: &[DiscreteJointDistribution],
) -> Result<DiscreteJointDistribution> {
    if sources.is_empty() || lambda.len() != sources.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} mixture weights for {} sources",
            lambda.len(),
            sources.len()
        )));
    }
    let (n_x, n_y) = sources[0].shape();
    if sources.iter().any(|d| d.shape() != (n_x, n_y)) {
        return Err(Error::ShapeMismatch("sources have different (n_x, n_y)".into()));
    }
    let mut probs = vec![0.0; n_x * n_y];
    for (w, d) in lambda.iter().zip(sources) {
        if *w == 0.0 {
            continue;
        }
        for (acc, p) in probs.iter_mut().zip(d.as_slice()) {
            *acc += w * p;
        }
    }
    DiscreteJointDistribution::new(n_x, n_y, probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> DiscreteJointDistribution {
        DiscreteJointDistribution::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap()
    }

    #[test]
    fn marginal_examples() {
        let u = DiscreteJointDistribution::uniform(2, 2).unwrap();
        assert_eq!(u.marginal_x(), vec![0.5, 0.5]);
        let pm = DiscreteJointDistribution::point_mass(2, 2, 0, 1).unwrap();
        assert_eq!(pm.marginal_x(), vec![1.0, 0.0]);
        let m = table().marginal_x();
        assert!((m[0] - 0.3).abs() < 1e-15 && (m[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn conditional_examples() {
        let u = DiscreteJointDistribution::uniform(2, 2).unwrap();
        assert_eq!(u.conditional_y_given_x(0).unwrap().as_slice(), &[0.5, 0.5]);
        let pm = DiscreteJointDistribution::point_mass(2, 2, 0, 1).unwrap();
        assert_eq!(pm.conditional_y_given_x(0).unwrap().as_slice(), &[0.0, 1.0]);
        assert_eq!(pm.conditional_y_given_x(1), Err(Error::ZeroMarginal { x: 1 }));
        let c = table().conditional_y_given_x(1).unwrap();
        assert!((c[0] - 3.0 / 7.0).abs() < 1e-15 && (c[1] - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn construction_tolerances() {
        assert!(DiscreteJointDistribution::new(1, 2, vec![0.5, 0.5 + 5e-10]).is_ok());
        assert!(DiscreteJointDistribution::new(1, 2, vec![0.5, 0.6]).is_err());
        assert!(DiscreteJointDistribution::new(1, 2, vec![-0.1, 1.1]).is_err());
        assert!(DiscreteJointDistribution::new(0, 2, vec![]).is_err());
        assert!(DiscreteJointDistribution::new(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn mixture_examples() {
        let d0 = DiscreteJointDistribution::point_mass(2, 2, 0, 0).unwrap();
        let d1 = DiscreteJointDistribution::point_mass(2, 2, 1, 1).unwrap();
        let sources = vec![d0.clone(), d1];
        let m = mixture(&SimplexVector::vertex(2, 0), &sources).unwrap();
        assert_eq!(m, d0);
        let half = SimplexVector::uniform(2);
        let m = mixture(&half, &sources).unwrap();
        assert_eq!(m.prob(0, 0), 0.5);
        assert_eq!(m.prob(1, 1), 0.5);
        let same = mixture(&half, &[table(), table()]).unwrap();
        for (a, b) in same.as_slice().iter().zip(table().as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn mixture_shape_mismatch() {
        let a = DiscreteJointDistribution::uniform(2, 2).unwrap();
        let b = DiscreteJointDistribution::uniform(3, 2).unwrap();
        assert!(matches!(
            mixture(&SimplexVector::uniform(2), &[a.clone(), b]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            mixture(&SimplexVector::uniform(3), &[a.clone(), a]),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
