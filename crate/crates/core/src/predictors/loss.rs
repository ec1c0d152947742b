use serde::{Deserialize, Serialize};

use super::hypothesis::Hypothesis;
use crate::domain_model::DiscreteJointDistribution;
use crate::error::{Error, Result};

/// Probability floor applied to cross-entropy on reporting paths.
pub const REPORT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Squared,
    CrossEntropy,
}

/// Loss function together with its uniform pointwise bound `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    #[serde(rename = "M")]
    pub m: f64,
}

impl LossSpec {
    pub fn new(kind: LossKind, m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidArgument(format!("loss bound M must be positive, got {m}")));
        }
        Ok(Self { kind, m })
    }
}

fn check_model(kind: LossKind, h: &Hypothesis) -> Result<()> {
    match (kind, h) {
        (LossKind::Squared, Hypothesis::Regression(_))
        | (LossKind::CrossEntropy, Hypothesis::Probability(_)) => Ok(()),
        _ => Err(Error::ModelMismatch(format!("{kind:?} loss with a {:?} hypothesis", h.model()))),
    }
}

/// Pointwise loss `L(h, x, y)`. For the squared loss `labels[y]` is the real
/// label attached to output index `y`; it is ignored for cross-entropy.
pub fn loss_at(kind: LossKind, h: &Hypothesis, x: usize, y: usize, labels: &[f64]) -> Result<f64> {
    check_model(kind, h)?;
    Ok(match h {
        Hypothesis::Regression(r) => {
            let e = r.value(x) - labels[y];
            e * e
        }
        Hypothesis::Probability(p) => {
            let v = p.value(x, y);
            if v <= 0.0 {
                return Err(Error::NonpositiveProbability { x, y, value: v });
            }
            -v.ln()
        }
    })
}

/// Pointwise loss with the cross-entropy floor; never fails on a zero probability.
pub fn loss_at_clipped(kind: LossKind, h: &Hypothesis, x: usize, y: usize, labels: &[f64]) -> Result<f64> {
    check_model(kind, h)?;
    Ok(match h {
        Hypothesis::Regression(r) => {
            let e = r.value(x) - labels[y];
            e * e
        }
        Hypothesis::Probability(p) => -p.value(x, y).max(REPORT_FLOOR).ln(),
    })
}

fn check_shape(d: &DiscreteJointDistribution, h: &Hypothesis, labels: &[f64]) -> Result<()> {
    let ok = match h {
        Hypothesis::Regression(r) => r.n_x() == d.n_x() && labels.len() == d.n_y(),
        Hypothesis::Probability(p) => p.shape() == d.shape(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ShapeMismatch("hypothesis, labels and distribution disagree".into()))
    }
}

fn expected_with(
    d: &DiscreteJointDistribution,
    h: &Hypothesis,
    kind: LossKind,
    labels: &[f64],
    pointwise: fn(LossKind, &Hypothesis, usize, usize, &[f64]) -> Result<f64>,
) -> Result<f64> {
    check_shape(d, h, labels)?;
    let mut total = 0.0;
    for (x, y) in d.support() {
        total += d.prob(x, y) * pointwise(kind, h, x, y, labels)?;
    }
    Ok(total)
}

/// `L(D, h) = Σ D(x, y) L(h, x, y)` over the support of `D`.
pub fn expected_loss(d: &DiscreteJointDistribution, h: &Hypothesis, kind: LossKind, labels: &[f64]) -> Result<f64> {
    expected_with(d, h, kind, labels, loss_at)
}

/// Expected loss for reports: cross-entropy uses the probability floor.
pub fn expected_loss_clipped(
    d: &DiscreteJointDistribution,
    h: &Hypothesis,
    kind: LossKind,
    labels: &[f64],
) -> Result<f64> {
    expected_with(d, h, kind, labels, loss_at_clipped)
}

/// Points on which source losses must stay below `M`.
///
/// This is the union of the source supports. For the squared loss, inputs
/// no source reaches also include every output, since the pooled conditional
/// there is uniform.
pub fn evaluation_support(kind: LossKind, sources: &[DiscreteJointDistribution]) -> Vec<(usize, usize)> {
    let Some(first) = sources.first() else {
        return Vec::new();
    };
    let (n_x, n_y) = first.shape();
    let mut pts = Vec::new();
    for x in 0..n_x {
        let reached = sources.iter().any(|d| d.row(x).iter().any(|p| *p > 0.0));
        for y in 0..n_y {
            let hit = sources.iter().any(|d| d.prob(x, y) > 0.0);
            if hit || (kind == LossKind::Squared && !reached) {
                pts.push((x, y));
            }
        }
    }
    pts
}

/// Largest (floored) pointwise loss of any source hypothesis on the evaluation support.
pub fn empirical_loss_bound(
    kind: LossKind,
    sources: &[DiscreteJointDistribution],
    hs: &[Hypothesis],
    labels: &[f64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in evaluation_support(kind, sources) {
        for h in hs {
            worst = worst.max(loss_at_clipped(kind, h, x, y, labels)?);
        }
    }
    Ok(worst)
}

/// Checks that every source hypothesis has pointwise loss at most `loss.m`
/// on the evaluation support.
pub fn validate_loss_bound(
    loss: &LossSpec,
    sources: &[DiscreteJointDistribution],
    hs: &[Hypothesis],
    labels: &[f64],
) -> Result<()> {
    for (x, y) in evaluation_support(loss.kind, sources) {
        for (k, h) in hs.iter().enumerate() {
            let l = loss_at_clipped(loss.kind, h, x, y, labels)?;
            if l > loss.m * (1.0 + 1e-12) {
                return Err(Error::LossBoundViolated { k, x, y, loss: l, bound: loss.m });
            }
        }
    }
    Ok(())
}
