use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::domain_model::SimplexVector;
use crate::error::{Error, Result};
use crate::oracle::{simplex_grid, GridSpec};
use crate::predictors::{
    convex_combination, dw_marginal, dw_normalized, dw_probability, dw_regression, expected_loss_clipped, Hypothesis,
    ProbabilityHypothesis, RegressionHypothesis,
};

/// Which distribution-weighted rule to evaluate in model P.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combiner {
    /// Joint weights `D_k(x, y)`; the rule the solver optimizes.
    #[default]
    Joint,
    /// Joint rule renormalized per input.
    Normalized,
    /// Weights from input marginals `D_k(x)`.
    Marginal,
}

/// `h_z^η` for the scenario's model; `combiner` only matters in model P.
pub fn combined_hypothesis(scenario: &Scenario, z: &SimplexVector, eta: f64, combiner: Combiner) -> Result<Hypothesis> {
    match &scenario.hypotheses[0] {
        Hypothesis::Regression(_) => {
            let hs: Vec<RegressionHypothesis> = scenario
                .hypotheses
                .iter()
                .map(|h| match h {
                    Hypothesis::Regression(r) => Ok(r.clone()),
                    _ => Err(Error::ModelMismatch("mixed models".into())),
                })
                .collect::<Result<_>>()?;
            Ok(dw_regression(z, eta, &scenario.sources, &hs)?.into())
        }
        Hypothesis::Probability(_) => {
            let hs: Vec<ProbabilityHypothesis> = scenario
                .hypotheses
                .iter()
                .map(|h| match h {
                    Hypothesis::Probability(q) => Ok(q.clone()),
                    _ => Err(Error::ModelMismatch("mixed models".into())),
                })
                .collect::<Result<_>>()?;
            let out = match combiner {
                Combiner::Joint => dw_probability(z, eta, &scenario.sources, &hs)?,
                Combiner::Normalized => dw_normalized(z, eta, &scenario.sources, &hs)?,
                Combiner::Marginal => dw_marginal(z, eta, &scenario.sources, &hs)?,
            };
            Ok(out.into())
        }
    }
}

/// Default λ-grid resolution: 0.1 up to three sources, 0.2 beyond.
pub fn default_lambda_resolution(p: usize) -> f64 {
    if p <= 3 {
        0.1
    } else {
        0.2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub target: String,
    pub lambda: Vec<f64>,
    pub dw: f64,
    pub unif: f64,
    /// `L(D_λ, h_k)` for each source predictor.
    pub singles: Vec<f64>,
    /// `L(D_λ, Σ λ_k h_k)`.
    pub best_convex: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub p: usize,
    /// Named targets, then `grid_i` rows, then the `worst` row.
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn worst(&self) -> &SweepRow {
        self.rows.last().expect("sweep has a worst row")
    }

    pub fn grid_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.target.starts_with("grid_"))
    }

    /// CSV with 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("target,lambda,dw,unif");
        for k in 1..=self.p {
            write!(out, ",h_{k}").unwrap();
        }
        out.push_str(",best_convex\n");
        for r in &self.rows {
            let lambda: Vec<String> = r.lambda.iter().map(|v| fmt_csv(*v)).collect();
            write!(out, "{},{},{},{}", r.target, lambda.join(";"), fmt_csv(r.dw), fmt_csv(r.unif)).unwrap();
            for s in &r.singles {
                write!(out, ",{}", fmt_csv(*s)).unwrap();
            }
            writeln!(out, ",{}", fmt_csv(r.best_convex)).unwrap();
        }
        out
    }
}

/// Float in scientific notation with 9 significant digits.
pub fn fmt_csv(v: f64) -> String {
    format!("{v:.8e}")
}

/// Loss of the combined predictor, the uniform combination, each source
/// predictor and the matching convex combination on every named target and
/// λ-grid point. Losses use the cross-entropy floor.
pub fn robustness_sweep(
    scenario: &Scenario,
    z: &SimplexVector,
    eta: f64,
    resolution: f64,
    combiner: Combiner,
) -> Result<SweepTable> {
    let p = scenario.p();
    if z.len() != p {
        return Err(Error::ShapeMismatch(format!("z has {} entries for {p} sources", z.len())));
    }
    let kind = scenario.loss.kind;
    let labels = &scenario.labels;
    let per_source = |h: &Hypothesis| -> Result<Vec<f64>> {
        scenario.sources.iter().map(|d| expected_loss_clipped(d, h, kind, labels)).collect()
    };
    let dw = per_source(&combined_hypothesis(scenario, z, eta, combiner)?)?;
    let unif = per_source(&convex_combination(&SimplexVector::uniform(p), &scenario.hypotheses)?)?;
    let singles: Vec<Vec<f64>> = scenario.hypotheses.iter().map(per_source).collect::<Result<_>>()?;

    let mut targets: Vec<(String, SimplexVector)> =
        scenario.targets.iter().map(|t| (t.name.clone(), t.lambda.clone())).collect();
    let grid = simplex_grid(GridSpec::new(p, resolution)?)?;
    targets.extend(grid.into_iter().enumerate().map(|(i, l)| (format!("grid_{i}"), l)));

    let dot = |l: &SimplexVector, v: &[f64]| l.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mut rows: Vec<SweepRow> = targets
        .par_iter()
        .map(|(name, lambda)| {
            let g = convex_combination(lambda, &scenario.hypotheses)?;
            let best = per_source(&g)?;
            Ok(SweepRow {
                target: name.clone(),
                lambda: lambda.as_slice().to_vec(),
                dw: dot(lambda, &dw),
                unif: dot(lambda, &unif),
                singles: singles.iter().map(|s| dot(lambda, s)).collect(),
                best_convex: dot(lambda, &best),
            })
        })
        .collect::<Result<_>>()?;

    let mut worst = rows[0].clone();
    worst.target = "worst".into();
    for r in &rows[1..] {
        if r.dw > worst.dw {
            worst.dw = r.dw;
            worst.lambda.clone_from(&r.lambda);
        }
        worst.unif = worst.unif.max(r.unif);
        for (a, b) in worst.singles.iter_mut().zip(&r.singles) {
            *a = a.max(*b);
        }
        worst.best_convex = worst.best_convex.max(r.best_convex);
    }
    rows.push(worst);
    Ok(SweepTable { p, rows })
}
