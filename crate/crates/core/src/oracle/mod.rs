//! Brute-force and numerical checks used to validate the solver: simplex
//! grids, grid min-max, finite differences and convexity probes.

mod checks;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain_model::{mixture, renyi_d_alpha, DiscreteJointDistribution, SimplexVector};
use crate::error::{Error, Result};
use crate::predictors::{convex_combination, expected_loss_clipped, Hypothesis, LossKind};

pub use checks::{
    decomposition_check, gradient_check, gradient_check_with, interior_point, uv_convexity_check, CheckReport,
    GRADIENT_STEP, GRADIENT_TOL, IDENTITY_TOL,
};

/// Largest grid the oracle will enumerate.
pub const MAX_GRID_POINTS: u128 = 10_000_000;

/// Slack allowed by the midpoint-convexity probe.
pub const CONVEXITY_TOL: f64 = 1e-10;

/// Lattice `{z ∈ Δ_p : z / resolution ∈ Z^p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub p: usize,
    pub resolution: f64,
}

impl GridSpec {
    pub fn new(p: usize, resolution: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("grid dimension must be positive".into()));
        }
        if !(resolution > 0.0 && resolution <= 1.0) {
            return Err(Error::InvalidArgument(format!("resolution must lie in (0, 1], got {resolution}")));
        }
        let steps = 1.0 / resolution;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::InvalidArgument(format!("1/resolution must be an integer, got {steps}")));
        }
        Ok(Self { p, resolution })
    }

    /// Default resolution for dimension `p`.
    pub fn default_for(p: usize) -> Self {
        let resolution = match p {
            0..=2 => 1e-3,
            3 => 0.02,
            4 => 0.05,
            _ => 0.1,
        };
        Self { p, resolution }
    }

    /// Default lattice refined so that the uniform point lies on it.
    pub fn containing_uniform(p: usize) -> Self {
        let base = Self::default_for(p);
        let steps = base.steps().div_ceil(p as u32) * p as u32;
        Self { p, resolution: 1.0 / steps as f64 }
    }

    pub fn steps(&self) -> u32 {
        (1.0 / self.resolution).round() as u32
    }

    /// `C(m + p − 1, p − 1)` with `m = 1 / resolution`.
    pub fn size(&self) -> u128 {
        binomial(self.steps() as u128 + self.p as u128 - 1, self.p as u128 - 1)
    }

    fn check_size(&self) -> Result<()> {
        let n = self.size();
        if n > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge(n));
        }
        Ok(())
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Integer compositions of `m` into `p` parts, lexicographically ascending.
fn compositions(m: u32, p: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; p];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
    }
    rec(0, m, &mut cur, &mut out);
    out
}

fn to_simplex(c: &[u32], m: u32) -> SimplexVector {
    let m = m as f64;
    SimplexVector::new(c.iter().map(|v| *v as f64 / m).collect()).expect("lattice points are on the simplex")
}

/// Every lattice point, lexicographically ascending.
pub fn simplex_grid(spec: GridSpec) -> Result<Vec<SimplexVector>> {
    spec.check_size()?;
    let m = spec.steps();
    Ok(compositions(m, spec.p).iter().map(|c| to_simplex(c, m)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScan {
    pub z_best: SimplexVector,
    pub value: f64,
    /// Max of `|Δf| / ‖Δz‖` over lattice neighbors `z ± resolution·(e_i − e_j)`.
    pub lipschitz: f64,
    pub points: usize,
}

/// Grid minimum of `f` (first lexicographic point on ties) and the empirical
/// Lipschitz constant over neighboring lattice points.
pub fn grid_scan<F>(f: F, spec: GridSpec) -> Result<GridScan>
where
    F: Fn(&SimplexVector) -> Result<f64> + Sync,
{
    spec.check_size()?;
    let m = spec.steps();
    let comps = compositions(m, spec.p);
    let values: Vec<f64> = comps.par_iter().map(|c| f(&to_simplex(c, m))).collect::<Result<_>>()?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    let index: HashMap<&[u32], usize> = comps.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
    let step_norm = spec.resolution * std::f64::consts::SQRT_2;
    let mut lipschitz: f64 = 0.0;
    let mut nb = vec![0u32; spec.p];
    for (i, c) in comps.iter().enumerate() {
        for a in 0..spec.p {
            for b in 0..spec.p {
                if a == b || c[b] == 0 {
                    continue;
                }
                nb.copy_from_slice(c);
                nb[a] += 1;
                nb[b] -= 1;
                if let Some(&j) = index.get(nb.as_slice()) {
                    if j > i {
                        lipschitz = lipschitz.max((values[j] - values[i]).abs() / step_norm);
                    }
                }
            }
        }
    }
    Ok(GridScan { z_best: to_simplex(&comps[best], m), value: values[best], lipschitz, points: comps.len() })
}

/// Exact minimum of `f` over the grid.
pub fn brute_force_minmax<F>(f: F, spec: GridSpec) -> Result<(SimplexVector, f64)>
where
    F: Fn(&SimplexVector) -> Result<f64> + Sync,
{
    let scan = grid_scan(f, spec)?;
    Ok((scan.z_best, scan.value))
}

/// Central difference `(f(z + s·d) − f(z − s·d)) / (2s)`.
pub fn finite_diff_directional<F>(f: F, z: &SimplexVector, direction: &[f64], step: f64) -> Result<f64>
where
    F: Fn(&SimplexVector) -> Result<f64>,
{
    if direction.len() != z.len() {
        return Err(Error::ShapeMismatch("direction and point differ in length".into()));
    }
    if direction.iter().sum::<f64>().abs() > 1e-12 || !(step > 0.0) {
        return Err(Error::InfeasibleProbe);
    }
    let shift = |s: f64| -> Result<SimplexVector> {
        let w: Vec<f64> = z.iter().zip(direction).map(|(a, d)| a + s * d).collect();
        if w.iter().any(|v| *v < 0.0) {
            return Err(Error::InfeasibleProbe);
        }
        SimplexVector::new(w).map_err(|_| Error::InfeasibleProbe)
    };
    let plus = shift(step)?;
    let minus = shift(-step)?;
    Ok((f(&plus)? - f(&minus)?) / (2.0 * step))
}

/// `e_i − e_j` in dimension `p`.
pub fn edge_direction(p: usize, i: usize, j: usize) -> Vec<f64> {
    let mut d = vec![0.0; p];
    d[i] += 1.0;
    d[j] -= 1.0;
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub trials: usize,
    /// Largest `f(mid) − (f(a) + f(b)) / 2`; negative when strictly convex.
    pub worst_violation: f64,
    pub passes: bool,
}

/// Midpoint-convexity probe on pairs drawn from `sampler`.
pub fn convexity_probe<F, S>(f: F, mut sampler: S, trials: usize) -> Result<ProbeReport>
where
    F: Fn(&SimplexVector) -> Result<f64>,
    S: FnMut() -> (SimplexVector, SimplexVector),
{
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let (a, b) = sampler();
        let mid = SimplexVector::new(a.iter().zip(b.iter()).map(|(x, y)| 0.5 * (x + y)).collect())?;
        let v = f(&mid)? - 0.5 * (f(&a)? + f(&b)?);
        worst = worst.max(v);
    }
    Ok(ProbeReport { trials, worst_violation: worst, passes: worst <= CONVEXITY_TOL })
}

/// `max_k L(D_k, Σ α_k h_k)`, the worst mixture loss of a convex combination
/// (the loss is linear in the mixture weights, so vertices suffice).
pub fn convex_combination_max_loss(
    alpha: &SimplexVector,
    sources: &[DiscreteJointDistribution],
    hypotheses: &[Hypothesis],
    kind: LossKind,
    labels: &[f64],
) -> Result<f64> {
    let g = convex_combination(alpha, hypotheses)?;
    let mut worst = f64::NEG_INFINITY;
    for d in sources {
        worst = worst.max(expected_loss_clipped(d, &g, kind, labels)?);
    }
    Ok(worst)
}

/// Grid approximation of `inf_λ d_α(target ‖ D_λ)`.
pub fn renyi_mixture_infimum(
    target: &DiscreteJointDistribution,
    sources: &[DiscreteJointDistribution],
    alpha: f64,
    spec: GridSpec,
) -> Result<(SimplexVector, f64)> {
    brute_force_minmax(
        |lambda| match renyi_d_alpha(target, &mixture(lambda, sources)?, alpha) {
            Ok(v) => Ok(v),
            Err(Error::SupportViolation { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        },
        spec,
    )
}
