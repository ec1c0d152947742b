//! Convex and distribution-weighted combinations of source predictors.
//!
//! The distribution-weighted rules mix the `h_k` with per-point weights
//! `(z_k D_k + η U / p) / (Σ_j z_j D_j + η U)`, where `U` is uniform. The
//! regression and marginal rules weight by input marginals `D_k(x)`; the
//! probability rule weights by joint values `D_k(x, y)`.

use super::hypothesis::{Hypothesis, ProbabilityHypothesis, RegressionHypothesis};
use crate::domain_model::{DiscreteJointDistribution, SimplexVector};
use crate::error::{Error, Result};

/// Pointwise `Σ_k α_k h_k`.
pub fn convex_combination(alpha: &SimplexVector, hs: &[Hypothesis]) -> Result<Hypothesis> {
    if hs.is_empty() || alpha.len() != hs.len() {
        return Err(Error::ShapeMismatch(format!("{} weights for {} hypotheses", alpha.len(), hs.len())));
    }
    match &hs[0] {
        Hypothesis::Regression(first) => {
            let n_x = first.n_x();
            let mut out = vec![0.0; n_x];
            for (a, h) in alpha.iter().zip(hs) {
                let Hypothesis::Regression(r) = h else {
                    return Err(Error::ShapeMismatch("mixed hypothesis models".into()));
                };
                if r.n_x() != n_x {
                    return Err(Error::ShapeMismatch("hypotheses differ in n_x".into()));
                }
                out.iter_mut().zip(r.values()).for_each(|(o, v)| *o += a * v);
            }
            Ok(RegressionHypothesis::new(out)?.into())
        }
        Hypothesis::Probability(first) => {
            let (n_x, n_y) = first.shape();
            let mut out = vec![0.0; n_x * n_y];
            for (a, h) in alpha.iter().zip(hs) {
                let Hypothesis::Probability(q) = h else {
                    return Err(Error::ShapeMismatch("mixed hypothesis models".into()));
                };
                if q.shape() != (n_x, n_y) {
                    return Err(Error::ShapeMismatch("hypotheses differ in shape".into()));
                }
                out.iter_mut().zip(q.values()).for_each(|(o, v)| *o += a * v);
            }
            Ok(ProbabilityHypothesis::from_parts(n_x, n_y, out).into())
        }
    }
}

fn check_inputs(z: &SimplexVector, eta: f64, sources: &[DiscreteJointDistribution], p: usize) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::NonpositiveEta(eta));
    }
    if sources.is_empty() || sources.len() != p || z.len() != p {
        return Err(Error::ShapeMismatch(format!(
            "z has {} entries for {} sources and {p} hypotheses",
            z.len(),
            sources.len()
        )));
    }
    let shape = sources[0].shape();
    if sources.iter().any(|d| d.shape() != shape) {
        return Err(Error::ShapeMismatch("sources differ in shape".into()));
    }
    Ok(())
}

/// Weights `w_k` for one point given the source masses `mass[k]` there and
/// the uniform mass `u`.
pub fn point_weights(z: &SimplexVector, eta: f64, mass: &[f64], u: f64) -> Vec<f64> {
    let p = mass.len() as f64;
    let denom: f64 = z.iter().zip(mass).map(|(zk, m)| zk * m).sum::<f64>() + eta * u;
    z.iter().zip(mass).map(|(zk, m)| (zk * m + eta * u / p) / denom).collect()
}

/// Per-input weights of the marginal-based rules; row `x` holds `w_k(x)`.
pub fn marginal_weights(
    z: &SimplexVector,
    eta: f64,
    sources: &[DiscreteJointDistribution],
) -> Result<Vec<Vec<f64>>> {
    check_inputs(z, eta, sources, z.len())?;
    let marginals: Vec<Vec<f64>> = sources.iter().map(DiscreteJointDistribution::marginal_x).collect();
    let n_x = sources[0].n_x();
    let u = 1.0 / n_x as f64;
    Ok((0..n_x)
        .map(|x| {
            let mass: Vec<f64> = marginals.iter().map(|m| m[x]).collect();
            point_weights(z, eta, &mass, u)
        })
        .collect())
}

/// Per-point weights of the joint rule; entry `[x * n_y + y]` holds `w_k(x, y)`.
pub fn joint_weights(
    z: &SimplexVector,
    eta: f64,
    sources: &[DiscreteJointDistribution],
) -> Result<Vec<Vec<f64>>> {
    check_inputs(z, eta, sources, z.len())?;
    let (n_x, n_y) = sources[0].shape();
    let u = 1.0 / (n_x * n_y) as f64;
    Ok((0..n_x * n_y)
        .map(|i| {
            let mass: Vec<f64> = sources.iter().map(|d| d.as_slice()[i]).collect();
            point_weights(z, eta, &mass, u)
        })
        .collect())
}

/// Distribution-weighted combination for the regression model.
pub fn dw_regression(
    z: &SimplexVector,
    eta: f64,
    sources: &[DiscreteJointDistribution],
    hs: &[RegressionHypothesis],
) -> Result<RegressionHypothesis> {
    check_inputs(z, eta, sources, hs.len())?;
    let n_x = sources[0].n_x();
    if hs.iter().any(|h| h.n_x() != n_x) {
        return Err(Error::ShapeMismatch("hypotheses must be indexed by the same X".into()));
    }
    let weights = marginal_weights(z, eta, sources)?;
    let values = weights
        .iter()
        .enumerate()
        .map(|(x, w)| w.iter().zip(hs).map(|(wk, h)| wk * h.value(x)).sum())
        .collect();
    RegressionHypothesis::new(values)
}

fn check_prob_shapes(sources: &[DiscreteJointDistribution], hs: &[ProbabilityHypothesis]) -> Result<()> {
    let shape = sources[0].shape();
    if hs.iter().any(|h| h.shape() != shape) {
        return Err(Error::ShapeMismatch("hypotheses must share the sources' shape".into()));
    }
    Ok(())
}

/// Distribution-weighted combination for the probability model (joint weights).
pub fn dw_probability(
    z: &SimplexVector,
    eta: f64,
    sources: &[DiscreteJointDistribution],
    hs: &[ProbabilityHypothesis],
) -> Result<ProbabilityHypothesis> {
    check_inputs(z, eta, sources, hs.len())?;
    check_prob_shapes(sources, hs)?;
    let (n_x, n_y) = sources[0].shape();
    let weights = joint_weights(z, eta, sources)?;
    let values = weights
        .iter()
        .enumerate()
        .map(|(i, w)| w.iter().zip(hs).map(|(wk, h)| wk * h.values()[i]).sum())
        .collect();
    Ok(ProbabilityHypothesis::from_parts(n_x, n_y, values))
}

fn require_normalized(hs: &[ProbabilityHypothesis]) -> Result<()> {
    match hs.iter().position(|h| !h.is_normalized()) {
        Some(k) => Err(Error::InvalidArgument(format!("hypothesis {k} is not normalized per input"))),
        None => Ok(()),
    }
}

/// Joint rule renormalized over outputs for every input.
pub fn dw_normalized(
    z: &SimplexVector,
    eta: f64,
    sources: &[DiscreteJointDistribution],
    hs: &[ProbabilityHypothesis],
) -> Result<ProbabilityHypothesis> {
    require_normalized(hs)?;
    let base = dw_probability(z, eta, sources, hs)?;
    let (n_x, n_y) = base.shape();
    let mut values = Vec::with_capacity(n_x * n_y);
    for x in 0..n_x {
        let row = base.row(x);
        let total: f64 = row.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateNormalizer { x });
        }
        values.extend(row.iter().map(|v| v / total));
    }
    Ok(ProbabilityHypothesis::from_parts(n_x, n_y, values))
}

/// Per-input normalizers `Σ_y h_z^η(x, y)` of the joint rule.
pub fn normalizers(
    z: &SimplexVector,
    eta: f64,
    sources: &[DiscreteJointDistribution],
    hs: &[ProbabilityHypothesis],
) -> Result<Vec<f64>> {
    let base = dw_probability(z, eta, sources, hs)?;
    Ok((0..base.n_x()).map(|x| base.row(x).iter().sum()).collect())
}

/// Marginal-weighted combination; normalized whenever the inputs are.
pub fn dw_marginal(
    z: &SimplexVector,
    eta: f64,
    sources: &[DiscreteJointDistribution],
    hs: &[ProbabilityHypothesis],
) -> Result<ProbabilityHypothesis> {
    check_inputs(z, eta, sources, hs.len())?;
    check_prob_shapes(sources, hs)?;
    require_normalized(hs)?;
    let (n_x, n_y) = sources[0].shape();
    let weights = marginal_weights(z, eta, sources)?;
    let mut values = vec![0.0; n_x * n_y];
    for x in 0..n_x {
        for (wk, h) in weights[x].iter().zip(hs) {
            for y in 0..n_y {
                values[x * n_y + y] += wk * h.value(x, y);
            }
        }
    }
    Ok(ProbabilityHypothesis::from_parts(n_x, n_y, values))
}
