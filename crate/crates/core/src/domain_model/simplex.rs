use std::ops::Index;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries in `[-CLAMP_TOL, 0)` are treated as round-off and set to zero.
pub const CLAMP_TOL: f64 = 1e-12;
/// Largest deviation of the total from 1 that is silently renormalized.
pub const RENORM_TOL: f64 = 1e-9;

/// A point of the probability simplex: nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSimplex("empty weight vector".into()));
        }
        let mut w = weights;
        for (i, v) in w.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidSimplex(format!("entry {i} is not finite")));
            }
            if *v < 0.0 {
                if *v >= -CLAMP_TOL {
                    *v = 0.0;
                } else {
                    return Err(Error::InvalidSimplex(format!("entry {i} is negative ({v})")));
                }
            }
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > RENORM_TOL {
            return Err(Error::InvalidSimplex(format!("entries sum to {total}")));
        }
        w.iter_mut().for_each(|v| *v /= total);
        Ok(Self(w))
    }

    /// Normalizes arbitrary nonnegative weights with a positive total.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidSimplex(
                "weights must be finite, nonnegative and not all zero".into(),
            ));
        }
        Self::new(weights.into_iter().map(|v| v / total).collect())
    }

    pub fn uniform(p: usize) -> Self {
        assert!(p >= 1, "simplex dimension must be positive");
        Self(vec![1.0 / p as f64; p])
    }

    /// Vertex `e_k` of the simplex.
    pub fn vertex(p: usize, k: usize) -> Self {
        assert!(k < p, "vertex index out of range");
        let mut w = vec![0.0; p];
        w[k] = 1.0;
        Self(w)
    }

    /// Draw from the flat Dirichlet(1, ..., 1) distribution.
    pub fn dirichlet<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Self {
        let draws: Vec<f64> = (0..p).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        Self(draws.into_iter().map(|v: f64| v / total).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Applies a permutation: entry `i` of the result is entry `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&i| self.0[i]).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl TryFrom<Vec<f64>> for SimplexVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SimplexVector> for Vec<f64> {
    fn from(s: SimplexVector) -> Self {
        s.0
    }
}
