//! Exponentiated Rényi divergences between discrete distributions.
//!
//! `d_α(P‖Q) = [Σ P^α / Q^(α-1)]^(1/(α-1))` for `α > 1`, evaluated in log
//! space so large orders do not overflow. Terms with `P = 0` contribute
//! nothing (including `0/0`); `P > 0` with `Q = 0` makes the divergence
//! infinite and is reported as an error. The `α = ∞` limit is only exposed
//! through [`renyi_sup_ratio`].

use super::distribution::DiscreteJointDistribution;
use crate::error::{Error, Result};

/// `ln Σ_i p_i (p_i / q_i)^(α-1)`, or the index of the first support violation.
pub(crate) fn log_renyi_sum(p: &[f64], q: &[f64], alpha: f64) -> std::result::Result<f64, usize> {
    debug_assert_eq!(p.len(), q.len());
    let mut logs = Vec::with_capacity(p.len());
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Err(i);
        }
        logs.push(pi.ln() + (alpha - 1.0) * (pi / qi).ln());
    }
    Ok(log_sum_exp(&logs))
}

pub(crate) fn log_sum_exp(logs: &[f64]) -> f64 {
    let mx = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + logs.iter().map(|l| (l - mx).exp()).sum::<f64>().ln()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Rényi order must be finite and > 1, got {alpha}")))
    }
}

fn check_shapes(d: &DiscreteJointDistribution, dp: &DiscreteJointDistribution) -> Result<()> {
    if d.shape() == dp.shape() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("{:?} vs {:?}", d.shape(), dp.shape())))
    }
}

fn violation(d: &DiscreteJointDistribution, i: usize) -> Error {
    Error::SupportViolation { x: i / d.n_y(), y: i % d.n_y() }
}

/// Exponentiated Rényi divergence `d_α(D‖Dp)`.
pub fn renyi_d_alpha(
    d: &DiscreteJointDistribution,
    dp: &DiscreteJointDistribution,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_shapes(d, dp)?;
    let log_sum = log_renyi_sum(d.as_slice(), dp.as_slice(), alpha).map_err(|i| violation(d, i))?;
    Ok((log_sum / (alpha - 1.0)).exp())
}

/// `d_∞(D‖Dp) = sup D/Dp` over the support of `D`.
pub fn renyi_sup_ratio(d: &DiscreteJointDistribution, dp: &DiscreteJointDistribution) -> Result<f64> {
    check_shapes(d, dp)?;
    let mut sup: f64 = 0.0;
    for (i, (&a, &b)) in d.as_slice().iter().zip(dp.as_slice()).enumerate() {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return Err(violation(d, i));
        }
        sup = sup.max(a / b);
    }
    Ok(sup)
}

/// Target-conditional divergence term used by `ε_T`:
/// `max_k [E_{D_k(x)} d_α(D_T(·|x)‖D_k(·|x))^(α-1)]^(1/α) · ε^((α-1)/α) · M^(1/α)`.
///
/// Inputs where the target has no mass at `x` contribute a divergence of one,
/// since the target conditional there never enters a loss.
pub fn epsilon_target(
    target: &DiscreteJointDistribution,
    sources: &[DiscreteJointDistribution],
    alpha: f64,
    epsilon: f64,
    m: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if !(epsilon >= 0.0) || !(m > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be >= 0 and M > 0".into()));
    }
    if sources.is_empty() {
        return Err(Error::InvalidArgument("no source distributions".into()));
    }
    let target_marg = target.marginal_x();
    let mut worst: f64 = 0.0;
    for src in sources {
        check_shapes(target, src)?;
        let src_marg = src.marginal_x();
        let mut expectation = 0.0;
        for x in 0..src.n_x() {
            if src_marg[x] <= 0.0 {
                continue;
            }
            let term = if target_marg[x] <= 0.0 {
                1.0
            } else {
                let t_cond: Vec<f64> = target.row(x).iter().map(|v| v / target_marg[x]).collect();
                let s_cond: Vec<f64> = src.row(x).iter().map(|v| v / src_marg[x]).collect();
                log_renyi_sum(&t_cond, &s_cond, alpha)
                    .map_err(|y| Error::SupportViolation { x, y })?
                    .exp()
            };
            expectation += src_marg[x] * term;
        }
        worst = worst.max(expectation.powf(1.0 / alpha));
    }
    Ok(worst * epsilon.powf((alpha - 1.0) / alpha) * m.powf(1.0 / alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: &[f64]) -> DiscreteJointDistribution {
        DiscreteJointDistribution::new(1, p.len(), p.to_vec()).unwrap()
    }

    #[test]
    fn identity_is_one() {
        let d = DiscreteJointDistribution::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        for alpha in [1.5, 2.0, 5.0, 10.0, 50.0, 1000.0] {
            assert!((renyi_d_alpha(&d, &d, alpha).unwrap() - 1.0).abs() <= 1e-12);
        }
        assert_eq!(renyi_sup_ratio(&d, &d).unwrap(), 1.0);
    }

    #[test]
    fn hand_evaluated_order_two() {
        let d = dist(&[0.5, 0.5]);
        let dp = dist(&[0.25, 0.75]);
        let v = renyi_d_alpha(&d, &dp, 2.0).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-14, "{v}");
        assert_eq!(renyi_sup_ratio(&d, &dp).unwrap(), 2.0);
    }

    #[test]
    fn point_mass_against_uniform_approaches_n() {
        // Direct sum: d_α = [1 / (1/n)^(α-1)]^(1/(α-1)) = n for every α.
        let n = 5;
        let mut p = vec![0.0; n];
        p[2] = 1.0;
        let d = dist(&p);
        let u = dist(&vec![1.0 / n as f64; n]);
        for alpha in [2.0, 10.0, 100.0] {
            let v = renyi_d_alpha(&d, &u, alpha).unwrap();
            assert!((v - n as f64).abs() < 1e-9, "alpha {alpha}: {v}");
        }
        assert!((renyi_sup_ratio(&d, &u).unwrap() - n as f64).abs() < 1e-12);
    }

    #[test]
    fn support_violation_and_zero_over_zero() {
        let d = dist(&[0.5, 0.5, 0.0]);
        let dp = dist(&[1.0, 0.0, 0.0]);
        assert_eq!(renyi_d_alpha(&d, &dp, 2.0), Err(Error::SupportViolation { x: 0, y: 1 }));
        assert_eq!(renyi_sup_ratio(&d, &dp), Err(Error::SupportViolation { x: 0, y: 1 }));
        // The third cell is 0/0 and must contribute nothing.
        let v = renyi_d_alpha(&dp, &d, 3.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert!(renyi_d_alpha(&d, &d, 1.0).is_err());
    }

    #[test]
    fn epsilon_target_examples() {
        let d = DiscreteJointDistribution::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        // Same conditionals everywhere: divergence term is one.
        let v = epsilon_target(&d, &[d.clone(), d.clone()], 10.0, 0.04, 1.0).unwrap();
        assert!((v - 0.04f64.powf(0.9)).abs() < 1e-12);
        assert!((v - 0.0552).abs() < 1e-4);
        assert_eq!(epsilon_target(&d, &[d.clone()], 10.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn epsilon_target_matches_direct_sum() {
        let target = DiscreteJointDistribution::from_rows(&[vec![0.2, 0.2], vec![0.1, 0.5]]).unwrap();
        let s1 = DiscreteJointDistribution::from_rows(&[vec![0.3, 0.1], vec![0.3, 0.3]]).unwrap();
        let s2 = DiscreteJointDistribution::from_rows(&[vec![0.05, 0.45], vec![0.25, 0.25]]).unwrap();
        let (alpha, eps, m): (f64, f64, f64) = (3.0, 0.1, 2.0);
        // Independent evaluation straight from the definition.
        let mut best: f64 = 0.0;
        for s in [&s1, &s2] {
            let mut e = 0.0;
            for x in 0..2 {
                let sx: f64 = s.row(x).iter().sum();
                let tx: f64 = target.row(x).iter().sum();
                let mut inner = 0.0;
                for y in 0..2 {
                    let t = target.prob(x, y) / tx;
                    let q = s.prob(x, y) / sx;
                    inner += t.powf(alpha) / q.powf(alpha - 1.0);
                }
                e += sx * inner;
            }
            best = best.max(e.powf(1.0 / alpha));
        }
        let expected = best * eps.powf((alpha - 1.0) / alpha) * m.powf(1.0 / alpha);
        let got = epsilon_target(&target, &[s1, s2], alpha, eps, m).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }
}
