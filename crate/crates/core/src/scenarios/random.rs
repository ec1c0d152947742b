use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::Scenario;
use crate::domain_model::DiscreteJointDistribution;
use crate::error::Result;
use crate::predictors::{Hypothesis, LossKind, Model, ProbabilityHypothesis, RegressionHypothesis};

/// Random discrete instance for property checks.
///
/// Model R sources share one conditional and have some empty inputs; model P
/// sources are arbitrary tables with some empty cells. Hypotheses are
/// uniform in `[−2, 2]` (R) or per-input normalized with entries bounded
/// away from zero (P).
pub fn random_discrete_scenario(model: Model, seed: u64, p: usize, n_x: usize, n_y: usize) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sparse = |rng: &mut ChaCha8Rng| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() + 0.01 };
    match model {
        Model::Regression => {
            let cond: Vec<Vec<f64>> =
                (0..n_x).map(|_| (0..n_y).map(|_| rng.random::<f64>() + 0.05).collect()).collect();
            let sources = (0..p)
                .map(|_| {
                    let mut marg: Vec<f64> = (0..n_x).map(|_| sparse(&mut rng)).collect();
                    if marg.iter().all(|m| *m == 0.0) {
                        marg[0] = 1.0;
                    }
                    let w = (0..n_x).flat_map(|x| cond[x].iter().map(|c| c * marg[x]).collect::<Vec<_>>()).collect();
                    DiscreteJointDistribution::from_weights(n_x, n_y, w)
                })
                .collect::<Result<Vec<_>>>()?;
            let labels = (0..n_y).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let hypotheses = (0..p)
                .map(|_| {
                    RegressionHypothesis::new((0..n_x).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
                        .map(Hypothesis::from)
                })
                .collect::<Result<Vec<_>>>()?;
            Scenario::new(format!("random-reg-{seed}"), model, LossKind::Squared, None, labels, sources, hypotheses, None, "random")
        }
        Model::Probability => {
            let sources = (0..p)
                .map(|_| {
                    let mut w: Vec<f64> = (0..n_x * n_y).map(|_| sparse(&mut rng)).collect();
                    if w.iter().all(|m| *m == 0.0) {
                        w[0] = 1.0;
                    }
                    DiscreteJointDistribution::from_weights(n_x, n_y, w)
                })
                .collect::<Result<Vec<_>>>()?;
            let hypotheses = (0..p)
                .map(|_| {
                    let rows: Vec<Vec<f64>> = (0..n_x)
                        .map(|_| {
                            let r: Vec<f64> = (0..n_y).map(|_| rng.random::<f64>() + 0.05).collect();
                            let s: f64 = r.iter().sum();
                            r.iter().map(|v| v / s).collect()
                        })
                        .collect();
                    ProbabilityHypothesis::from_rows(&rows).map(Hypothesis::from)
                })
                .collect::<Result<Vec<_>>>()?;
            Scenario::new(format!("random-xent-{seed}"), model, LossKind::CrossEntropy, None, vec![], sources, hypotheses, None, "random")
        }
    }
}
