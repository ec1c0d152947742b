//! Hypotheses for both models, losses, and combination rules.

mod combine;
mod hypothesis;
mod loss;

pub use combine::{
    convex_combination, dw_marginal, dw_normalized, dw_probability, dw_regression, joint_weights,
    marginal_weights, normalizers, point_weights,
};
pub use hypothesis::{Hypothesis, Model, ProbabilityHypothesis, RegressionHypothesis, NORMALIZATION_TOL};
pub use loss::{
    empirical_loss_bound, evaluation_support, expected_loss, expected_loss_clipped, loss_at,
    loss_at_clipped, validate_loss_bound, LossKind, LossSpec, REPORT_FLOOR,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_model::{mixture, DiscreteJointDistribution, SimplexVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_point_instance() -> (Vec<DiscreteJointDistribution>, Vec<RegressionHypothesis>, Vec<f64>) {
        let d0 = DiscreteJointDistribution::point_mass(2, 2, 0, 0).unwrap();
        let d1 = DiscreteJointDistribution::point_mass(2, 2, 1, 1).unwrap();
        let h0 = RegressionHypothesis::constant(2, 0.0).unwrap();
        let h1 = RegressionHypothesis::constant(2, 1.0).unwrap();
        (vec![d0, d1], vec![h0, h1], vec![0.0, 1.0])
    }

    fn random_sources(rng: &mut ChaCha8Rng, p: usize, n_x: usize, n_y: usize) -> Vec<DiscreteJointDistribution> {
        (0..p)
            .map(|_| {
                let w: Vec<f64> = (0..n_x * n_y).map(|_| rng.random::<f64>() + 0.01).collect();
                DiscreteJointDistribution::from_weights(n_x, n_y, w).unwrap()
            })
            .collect()
    }

    fn random_prob_hyps(rng: &mut ChaCha8Rng, p: usize, n_x: usize, n_y: usize) -> Vec<ProbabilityHypothesis> {
        (0..p)
            .map(|_| {
                let mut v = Vec::new();
                for _ in 0..n_x {
                    let row: Vec<f64> = (0..n_y).map(|_| rng.random::<f64>() + 0.05).collect();
                    let s: f64 = row.iter().sum();
                    v.extend(row.iter().map(|r| r / s));
                }
                ProbabilityHypothesis::new(n_x, n_y, v).unwrap()
            })
            .collect()
    }

    #[test]
    fn two_point_source_losses_are_zero() {
        let (ds, hs, labels) = two_point_instance();
        for k in 0..2 {
            let h: Hypothesis = hs[k].clone().into();
            assert_eq!(expected_loss(&ds[k], &h, LossKind::Squared, &labels).unwrap(), 0.0);
        }
    }

    #[test]
    fn convex_combination_examples() {
        let (ds, hs, labels) = two_point_instance();
        let hs: Vec<Hypothesis> = hs.into_iter().map(Into::into).collect();
        assert_eq!(convex_combination(&SimplexVector::vertex(2, 0), &hs).unwrap(), hs[0]);
        let same = convex_combination(&SimplexVector::uniform(2), &[hs[1].clone(), hs[1].clone()]).unwrap();
        assert_eq!(same, hs[1]);
        let g = convex_combination(&SimplexVector::uniform(2), &hs).unwrap();
        let target = mixture(&SimplexVector::uniform(2), &ds).unwrap();
        let l = expected_loss(&target, &g, LossKind::Squared, &labels).unwrap();
        assert!((l - 0.25).abs() < 1e-15);
    }

    #[test]
    fn convex_combination_keeps_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hs: Vec<Hypothesis> = random_prob_hyps(&mut rng, 3, 4, 3).into_iter().map(Into::into).collect();
        let g = convex_combination(&SimplexVector::dirichlet(3, &mut rng), &hs).unwrap();
        let Hypothesis::Probability(g) = g else { panic!() };
        assert!(g.is_normalized());
    }

    #[test]
    fn dw_regression_two_point_weights() {
        let (ds, hs, _) = two_point_instance();
        let h = dw_regression(&SimplexVector::uniform(2), 0.01, &ds, &hs).unwrap();
        // Weight on h_1 at a: (0 + 0.01 * 0.5 / 2) / (0.5 + 0.01 * 0.5).
        assert!((h.value(0) - 0.0025 / 0.505).abs() < 1e-15);
        assert!((h.value(0) - 0.004950).abs() < 1e-6);
        assert!(matches!(dw_regression(&SimplexVector::uniform(2), 0.0, &ds, &hs), Err(crate::Error::NonpositiveEta(_))));
    }

    #[test]
    fn dw_single_source_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ds = random_sources(&mut rng, 1, 3, 2);
        let r = RegressionHypothesis::new(vec![0.3, -1.0, 2.0]).unwrap();
        let one = SimplexVector::uniform(1);
        let out = dw_regression(&one, 0.7, &ds, &[r.clone()]).unwrap();
        for x in 0..3 {
            assert!((out.value(x) - r.value(x)).abs() < 1e-15);
        }
        let hp = random_prob_hyps(&mut rng, 1, 3, 2);
        for combined in [
            dw_probability(&one, 0.3, &ds, &hp).unwrap(),
            dw_normalized(&one, 0.3, &ds, &hp).unwrap(),
            dw_marginal(&one, 0.3, &ds, &hp).unwrap(),
        ] {
            for (a, b) in combined.values().iter().zip(hp[0].values()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dw_identical_sources_matches_direct_formula() {
        // All D_k equal: weight_k(x) = (z_k D(x) + ηU/p) / (D(x) + ηU).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_sources(&mut rng, 1, 4, 2).remove(0);
        let ds = vec![d.clone(); 3];
        let hs: Vec<RegressionHypothesis> = (0..3)
            .map(|_| RegressionHypothesis::new((0..4).map(|_| rng.random::<f64>()).collect()).unwrap())
            .collect();
        let z = SimplexVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        let eta = 0.05;
        let out = dw_regression(&z, eta, &ds, &hs).unwrap();
        let marg = d.marginal_x();
        for x in 0..4 {
            let mut expected = 0.0;
            for k in 0..3 {
                expected += (z[k] * marg[x] + eta * 0.25 / 3.0) / (marg[x] + eta * 0.25) * hs[k].value(x);
            }
            assert!((out.value(x) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn dw_probability_term_by_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ds = random_sources(&mut rng, 2, 2, 2);
        let hs = random_prob_hyps(&mut rng, 2, 2, 2);
        let z = SimplexVector::uniform(2);
        let eta = 0.1;
        let out = dw_probability(&z, eta, &ds, &hs).unwrap();
        let u = 0.25;
        for x in 0..2 {
            for y in 0..2 {
                let denom = 0.5 * ds[0].prob(x, y) + 0.5 * ds[1].prob(x, y) + eta * u;
                let num0 = (0.5 * ds[0].prob(x, y) + eta * u / 2.0) * hs[0].value(x, y);
                let num1 = (0.5 * ds[1].prob(x, y) + eta * u / 2.0) * hs[1].value(x, y);
                assert!((out.value(x, y) - (num0 + num1) / denom).abs() < 1e-12);
            }
        }
        let same = dw_probability(&z, eta, &ds, &[hs[0].clone(), hs[0].clone()]).unwrap();
        for (a, b) in same.values().iter().zip(hs[0].values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn normalizer_bound_under_mu_floor() {
        // Shared conditional; marginal and conditional each floored at t/n,
        // t = 1/sqrt(2), so every cell is at least μU with μ = 0.5.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (n_x, n_y, mu, eta) = (6, 2, 0.5, 0.01);
        let t = std::f64::consts::FRAC_1_SQRT_2;
        let floored = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> {
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let s: f64 = w.iter().sum();
            w.iter().map(|v| t / n as f64 + (1.0 - t) * v / s).collect()
        };
        let cond: Vec<Vec<f64>> = (0..n_x).map(|_| floored(&mut rng, n_y)).collect();
        let ds: Vec<_> = (0..3)
            .map(|_| {
                let marg = floored(&mut rng, n_x);
                let w: Vec<f64> = (0..n_x).flat_map(|x| cond[x].iter().map(|c| marg[x] * c).collect::<Vec<_>>()).collect();
                DiscreteJointDistribution::from_weights(n_x, n_y, w).unwrap()
            })
            .collect();
        let uniform = 1.0 / (n_x * n_y) as f64;
        assert!(ds.iter().all(|d| d.as_slice().iter().all(|v| *v >= mu * uniform - 1e-15)));
        let hs = random_prob_hyps(&mut rng, 3, n_x, n_y);
        let bound = 1.0 + eta * n_y as f64 / mu;
        assert!((bound - 1.04).abs() < 1e-15);
        for _ in 0..50 {
            let z = SimplexVector::dirichlet(3, &mut rng);
            for nz in normalizers(&z, eta, &ds, &hs).unwrap() {
                assert!(nz <= bound, "{nz}");
            }
        }
    }

    #[test]
    fn normalizer_bound_needs_shared_conditionals() {
        // Both cells are >= 0.5 U, but each source favors the output its own
        // hypothesis predicts, so the row sum approaches 1.5.
        let d1 = DiscreteJointDistribution::from_rows(&[vec![0.75, 0.25]]).unwrap();
        let d2 = DiscreteJointDistribution::from_rows(&[vec![0.25, 0.75]]).unwrap();
        let h1 = ProbabilityHypothesis::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let h2 = ProbabilityHypothesis::from_rows(&[vec![0.0, 1.0]]).unwrap();
        let nz = normalizers(&SimplexVector::uniform(2), 0.01, &[d1, d2], &[h1, h2]).unwrap();
        assert!(nz[0] > 1.4);
    }

    #[test]
    fn marginal_equals_joint_under_uniform_conditionals() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (n_x, n_y) = (5, 3);
        let ds: Vec<_> = (0..3)
            .map(|_| {
                let marg: Vec<f64> = (0..n_x).map(|_| rng.random::<f64>() + 0.01).collect();
                let w: Vec<f64> = marg.iter().flat_map(|m| vec![*m; n_y]).collect();
                DiscreteJointDistribution::from_weights(n_x, n_y, w).unwrap()
            })
            .collect();
        let hs = random_prob_hyps(&mut rng, 3, n_x, n_y);
        for _ in 0..20 {
            let z = SimplexVector::dirichlet(3, &mut rng);
            let a = dw_marginal(&z, 0.02, &ds, &hs).unwrap();
            let b = dw_probability(&z, 0.02, &ds, &hs).unwrap();
            for (u, v) in a.values().iter().zip(b.values()) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalized_requires_normalized_inputs() {
        let ds = vec![DiscreteJointDistribution::uniform(1, 2).unwrap()];
        let h = ProbabilityHypothesis::from_rows(&[vec![0.2, 0.2]]).unwrap();
        assert!(dw_normalized(&SimplexVector::uniform(1), 0.1, &ds, &[h.clone()]).is_err());
        assert!(dw_marginal(&SimplexVector::uniform(1), 0.1, &ds, &[h]).is_err());
    }

    #[test]
    fn weights_converge_as_eta_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ds = random_sources(&mut rng, 3, 4, 2);
        let z = SimplexVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let limit: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                let m: Vec<f64> = ds.iter().map(|d| d.as_slice()[i]).collect();
                let dz: f64 = z.iter().zip(&m).map(|(a, b)| a * b).sum();
                z.iter().zip(&m).map(|(a, b)| a * b / dz).collect()
            })
            .collect();
        let mut prev = f64::INFINITY;
        for eta in [1e-2, 1e-4, 1e-6] {
            let w = joint_weights(&z, eta, &ds).unwrap();
            let err = w
                .iter()
                .zip(&limit)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).abs()))
                .fold(0.0, f64::max);
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-4);
    }

    fn instance() -> impl Strategy<Value = (u64, usize, f64)> {
        (any::<u64>(), 1usize..5, 1e-4f64..2.0)
    }

    proptest! {
        #[test]
        fn weights_are_simplex_and_outputs_in_envelope((seed, p, eta) in instance()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (n_x, n_y) = (4, 3);
            let mut ds = random_sources(&mut rng, p, n_x, n_y);
            // Knock out some mass so zero cells are covered too.
            ds[0] = DiscreteJointDistribution::point_mass(n_x, n_y, 1, 2).unwrap();
            let z = SimplexVector::dirichlet(p, &mut rng);
            for w in joint_weights(&z, eta, &ds).unwrap().iter().chain(marginal_weights(&z, eta, &ds).unwrap().iter()) {
                prop_assert!(w.iter().all(|v| *v >= 0.0));
                prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
            let hs = random_prob_hyps(&mut rng, p, n_x, n_y);
            let joint = dw_probability(&z, eta, &ds, &hs).unwrap();
            let marg = dw_marginal(&z, eta, &ds, &hs).unwrap();
            let norm = dw_normalized(&z, eta, &ds, &hs).unwrap();
            for i in 0..n_x * n_y {
                let lo = hs.iter().map(|h| h.values()[i]).fold(f64::INFINITY, f64::min);
                let hi = hs.iter().map(|h| h.values()[i]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(joint.values()[i] >= lo - 1e-15 && joint.values()[i] <= hi + 1e-15);
                prop_assert!(marg.values()[i] >= lo - 1e-15 && marg.values()[i] <= hi + 1e-15);
            }
            for x in 0..n_x {
                prop_assert!((marg.row(x).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                prop_assert!((norm.row(x).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn squared_loss_of_combinations_is_bounded((seed, p, eta) in instance()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (n_x, n_y) = (5, 3);
            let ds = random_sources(&mut rng, p, n_x, n_y);
            let labels: Vec<f64> = (0..n_y).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let hs: Vec<RegressionHypothesis> = (0..p)
                .map(|_| RegressionHypothesis::new((0..n_x).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect()).unwrap())
                .collect();
            let boxed: Vec<Hypothesis> = hs.iter().cloned().map(Into::into).collect();
            let m = empirical_loss_bound(LossKind::Squared, &ds, &boxed, &labels).unwrap();
            let z = SimplexVector::dirichlet(p, &mut rng);
            let target = mixture(&SimplexVector::dirichlet(p, &mut rng), &ds).unwrap();
            let dw: Hypothesis = dw_regression(&z, eta, &ds, &hs).unwrap().into();
            let cc = convex_combination(&z, &boxed).unwrap();
            for h in [dw, cc] {
                let l = expected_loss(&target, &h, LossKind::Squared, &labels).unwrap();
                prop_assert!(l <= m + 1e-12);
            }
        }
    }
}
