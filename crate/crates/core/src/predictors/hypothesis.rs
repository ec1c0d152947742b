use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-x sums within this tolerance of one mark a hypothesis as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Which of the two predictor families a problem uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// `h: X → R` with the squared loss.
    #[serde(rename = "R")]
    Regression,
    /// `h: X × Y → [0, 1]` with the cross-entropy loss.
    #[serde(rename = "P")]
    Probability,
}

/// Real-valued predictor indexed by input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionHypothesis {
    values: Vec<f64>,
}

impl RegressionHypothesis {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("regression hypothesis is empty".into()));
        }
        if let Some(x) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite prediction at x = {x}")));
        }
        Ok(Self { values })
    }

    pub fn constant(n_x: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n_x])
    }

    pub fn n_x(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Predictor over `X × Y` with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityHypothesis {
    n_x: usize,
    n_y: usize,
    values: Vec<f64>,
    normalized: bool,
}

impl ProbabilityHypothesis {
    pub fn new(n_x: usize, n_y: usize, values: Vec<f64>) -> Result<Self> {
        if n_x == 0 || n_y == 0 || values.len() != n_x * n_y {
            return Err(Error::InvalidArgument(format!(
                "probability hypothesis needs {n_x} x {n_y} entries, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "entry ({}, {}) = {} is outside [0, 1]",
                i / n_y,
                i % n_y,
                values[i]
            )));
        }
        Ok(Self::from_parts(n_x, n_y, values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_y = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_y) {
            return Err(Error::InvalidArgument("ragged hypothesis rows".into()));
        }
        Self::new(rows.len(), n_y, rows.concat())
    }

    /// Trusted constructor for combiner outputs; clamps round-off into `[0, 1]`.
    pub(crate) fn from_parts(n_x: usize, n_y: usize, mut values: Vec<f64>) -> Self {
        values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        let normalized = values
            .chunks(n_y)
            .all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOL);
        Self { n_x, n_y, values, normalized }
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
    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.n_y + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.values[x * self.n_y..(x + 1) * self.n_y]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n_y).map(<[f64]>::to_vec).collect()
    }

    /// Whether `Σ_y h(x, y) = 1` for every `x`.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

/// Either predictor family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Hypothesis {
    Regression(RegressionHypothesis),
    Probability(ProbabilityHypothesis),
}

impl Hypothesis {
    pub fn model(&self) -> Model {
        match self {
            Hypothesis::Regression(_) => Model::Regression,
            Hypothesis::Probability(_) => Model::Probability,
        }
    }

    pub fn n_x(&self) -> usize {
        match self {
            Hypothesis::Regression(h) => h.n_x(),
            Hypothesis::Probability(h) => h.n_x(),
        }
    }
}

impl From<RegressionHypothesis> for Hypothesis {
    fn from(h: RegressionHypothesis) -> Self {
        Hypothesis::Regression(h)
    }
}

impl From<ProbabilityHypothesis> for Hypothesis {
    fn from(h: ProbabilityHypothesis) -> Self {
        Hypothesis::Probability(h)
    }
}
