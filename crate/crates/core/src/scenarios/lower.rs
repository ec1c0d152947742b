//! Two-point and p-point instances on which no convex combination of the
//! source predictors is robust.

use super::scenario::{NamedTarget, Scenario};
use crate::domain_model::{DiscreteJointDistribution, SimplexVector};
use crate::error::{Error, Result};
use crate::predictors::{Hypothesis, LossKind, Model, ProbabilityHypothesis, RegressionHypothesis};

/// `X = {a, b}`, labels `{0, 1}`; `D_0` is a point mass at `(a, 0)` with
/// `h_0 ≡ 0`, `D_1` a point mass at `(b, 1)` with `h_1 ≡ 1`.
pub fn lower_bound_regression_instance() -> Scenario {
    let sources = vec![
        DiscreteJointDistribution::point_mass(2, 2, 0, 0).unwrap(),
        DiscreteJointDistribution::point_mass(2, 2, 1, 1).unwrap(),
    ];
    let hypotheses: Vec<Hypothesis> = vec![
        RegressionHypothesis::constant(2, 0.0).unwrap().into(),
        RegressionHypothesis::constant(2, 1.0).unwrap().into(),
    ];
    let targets = vec![
        NamedTarget { name: "D_1".into(), lambda: SimplexVector::vertex(2, 0) },
        NamedTarget { name: "D_2".into(), lambda: SimplexVector::vertex(2, 1) },
        NamedTarget { name: "D_T".into(), lambda: SimplexVector::uniform(2) },
    ];
    Scenario::new(
        "lower-reg",
        Model::Regression,
        LossKind::Squared,
        Some(1.0),
        vec![0.0, 1.0],
        sources,
        hypotheses,
        Some(targets),
        "exact two-point construction",
    )
    .expect("valid construction")
}

/// `D_k` is a point mass at `(x_k, y_k)` and `h_k(x, y) = 1{y = y_k}`.
///
/// The loss bound is the floored cross-entropy of a zero prediction.
pub fn lower_bound_crossentropy_instance(p: usize) -> Result<Scenario> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("need p >= 2, got {p}")));
    }
    let sources = (0..p).map(|k| DiscreteJointDistribution::point_mass(p, p, k, k)).collect::<Result<Vec<_>>>()?;
    let hypotheses = (0..p)
        .map(|k| {
            let rows: Vec<Vec<f64>> = (0..p).map(|_| (0..p).map(|y| if y == k { 1.0 } else { 0.0 }).collect()).collect();
            ProbabilityHypothesis::from_rows(&rows).map(Into::into)
        })
        .collect::<Result<Vec<Hypothesis>>>()?;
    Scenario::new(
        "lower-xent",
        Model::Probability,
        LossKind::CrossEntropy,
        None,
        Vec::new(),
        sources,
        hypotheses,
        None,
        format!("exact {p}-point construction"),
    )
}
