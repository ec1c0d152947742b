use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::{gamma_of, DcProblem};
use crate::domain_model::SimplexVector;
use crate::error::{Error, Result};

/// Starting point of the outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPoint {
    Uniform,
    Given(SimplexVector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub eta: f64,
    pub eta_prime: f64,
    pub outer_max_iters: usize,
    /// Stop once the relative decrease of γ falls below this.
    pub outer_tol: f64,
    pub inner_max_iters: usize,
    /// The inner solver stops when its step scale drops below this.
    pub inner_tol: f64,
    /// Initial step scale of the inner mirror descent.
    pub inner_step: f64,
    /// Iterations per inner restart epoch.
    pub inner_epoch: usize,
    /// Extra starts drawn from Dirichlet(1).
    pub restarts: usize,
    pub seed: u64,
    pub z0: InitialPoint,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eta: 1e-3,
            eta_prime: 1e-4,
            outer_max_iters: 100,
            outer_tol: 1e-9,
            inner_max_iters: 2000,
            inner_tol: 1e-10,
            inner_step: 1.0,
            inner_epoch: 25,
            restarts: 0,
            seed: 0,
            z0: InitialPoint::Uniform,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::NonpositiveEta(self.eta));
        }
        let positive = [
            ("eta_prime", self.eta_prime),
            ("outer_tol", self.outer_tol),
            ("inner_tol", self.inner_tol),
            ("inner_step", self.inner_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.outer_max_iters == 0 || self.inner_max_iters == 0 || self.inner_epoch == 0 {
            return Err(Error::InvalidArgument("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

/// Linearization of every `v_k` at `z_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DcDecomposition {
    pub z_t: SimplexVector,
    pub v_t: Vec<f64>,
    pub grad_v: Vec<Vec<f64>>,
}

impl DcDecomposition {
    pub fn linearize(problem: &DcProblem, z_t: &SimplexVector) -> Result<Self> {
        let uv = problem.uv(z_t)?;
        Ok(Self {
            z_t: z_t.clone(),
            v_t: uv.v,
            grad_v: problem.grad_v_all_raw(z_t.as_slice()),
        })
    }

    /// `Φ_t(z) = max_k [u_k(z) − v_k(z_t) − (z − z_t)·∇v_k(z_t)]` and its first maximizer.
    pub fn phi(&self, problem: &DcProblem, z: &[f64]) -> (f64, usize) {
        let u = problem.u_raw(z);
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, uk) in u.iter().enumerate() {
            let lin: f64 = z
                .iter()
                .zip(self.z_t.iter())
                .zip(&self.grad_v[k])
                .map(|((a, b), g)| (a - b) * g)
                .sum();
            let val = uk - self.v_t[k] - lin;
            if val > best.0 {
                best = (val, k);
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    pub z: SimplexVector,
    pub value: f64,
    pub start_value: f64,
    pub iters: usize,
}

fn mirror_step(z: &[f64], g: &[f64], step: f64) -> Vec<f64> {
    let logs: Vec<f64> = z.iter().zip(g).map(|(zi, gi)| zi.ln() - step * gi).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Approximately minimizes `Φ_t` over the simplex by restarted entropic
/// mirror descent with steps `c / (‖g_1‖∞ √t)`.
///
/// Each epoch restarts from the best iterate so far; `c` is halved after an
/// epoch without improvement. Returns `InnerStall` if nothing beats `z_t`.
pub fn inner_solve(problem: &DcProblem, lin: &DcDecomposition, config: &SolverConfig) -> Result<InnerResult> {
    let p = problem.p();
    let start = lin.z_t.as_slice().to_vec();
    let (start_value, _) = lin.phi(problem, &start);
    if p == 1 {
        return Err(Error::InnerStall { iters: 0 });
    }
    let mut best = start.clone();
    let mut best_val = start_value;
    let mut c = config.inner_step;
    let mut iters = 0;
    while iters < config.inner_max_iters && c >= config.inner_tol && best_val > 0.0 {
        let epoch_best = best_val;
        let mut cur = best.clone();
        let mut scale = None;
        for t in 1..=config.inner_epoch {
            if iters >= config.inner_max_iters {
                break;
            }
            iters += 1;
            let (val, k) = lin.phi(problem, &cur);
            if val < best_val {
                best_val = val;
                best.clone_from(&cur);
            }
            let gu = problem.grad_u_raw(k, &cur);
            let mut g: Vec<f64> = gu.iter().zip(&lin.grad_v[k]).map(|(a, b)| a - b).collect();
            let mean = g.iter().sum::<f64>() / p as f64;
            g.iter_mut().for_each(|v| *v -= mean);
            let norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let s = *scale.get_or_insert(norm);
            if !(s > 0.0) || norm == 0.0 {
                break;
            }
            cur = mirror_step(&cur, &g, c / (s * (t as f64).sqrt()));
        }
        let (val, _) = lin.phi(problem, &cur);
        if val < best_val {
            best_val = val;
            best = cur;
        }
        if best_val >= epoch_best {
            c *= 0.5;
        }
    }
    if best_val < start_value {
        Ok(InnerResult { z: SimplexVector::new(best)?, value: best_val, start_value, iters })
    } else {
        Err(Error::InnerStall { iters })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// γ fell to zero.
    Optimal,
    /// Relative decrease of γ below `outer_tol`.
    Converged,
    /// The inner solver found no improving point.
    InnerStall,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub z: Vec<f64>,
    pub gamma: f64,
    pub losses: Vec<f64>,
    /// `|Φ_t(z_t) − γ_t|`; zero up to round-off.
    pub majorization_gap: f64,
    /// `γ(z_{t+1}) − Φ_t(z_{t+1})`; nonpositive up to round-off.
    pub majorant_excess: f64,
    pub inner_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub z0: Vec<f64>,
    pub gamma: f64,
    pub iters: usize,
    pub stop: Option<StopReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    /// Iterates of the winning start; record 0 is the starting point.
    pub records: Vec<IterRecord>,
    pub stop: Option<StopReason>,
    pub starts: Vec<StartSummary>,
    pub best_start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    GlobalPlausible,
    LocalOnly,
}

/// `γ* ≤ threshold` is read as a plausible global optimum; this is a
/// heuristic, not a proof.
pub fn optimality_certificate(gamma_star: f64, threshold: f64) -> Certificate {
    if gamma_star <= threshold {
        Certificate::GlobalPlausible
    } else {
        Certificate::LocalOnly
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub z_star: SimplexVector,
    pub gamma_star: f64,
    pub losses: Vec<f64>,
    pub trace: SolveTrace,
    pub certificate: Certificate,
}

/// A failed solve with whatever trace was collected.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveFailure {
    pub error: Error,
    pub trace: SolveTrace,
}

impl std::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} iterations", self.error, self.trace.records.len().saturating_sub(1))
    }
}

impl std::error::Error for SolveFailure {}

struct Run {
    z: SimplexVector,
    gamma: f64,
    losses: Vec<f64>,
    records: Vec<IterRecord>,
    stop: StopReason,
}

fn record(iter: usize, z: &SimplexVector, gamma: f64, losses: Vec<f64>) -> IterRecord {
    IterRecord {
        iter,
        z: z.as_slice().to_vec(),
        gamma,
        losses,
        majorization_gap: 0.0,
        majorant_excess: 0.0,
        inner_iters: 0,
    }
}

fn run_from(problem: &DcProblem, z0: SimplexVector, config: &SolverConfig) -> std::result::Result<Run, (Error, Vec<IterRecord>)> {
    let mut records = Vec::new();
    let mut z = z0;
    let mut losses = problem.domain_losses(&z).map_err(|e| (e, Vec::new()))?;
    let mut gamma = gamma_of(z.as_slice(), &losses).0;
    records.push(record(0, &z, gamma, losses.clone()));
    let mut stop = StopReason::MaxIters;
    for t in 1..=config.outer_max_iters {
        if gamma <= 1e-12 {
            stop = StopReason::Optimal;
            break;
        }
        let lin = match DcDecomposition::linearize(problem, &z) {
            Ok(l) => l,
            Err(e) => return Err((e, records)),
        };
        let inner = match inner_solve(problem, &lin, config) {
            Ok(r) => r,
            Err(Error::InnerStall { .. }) => {
                stop = StopReason::InnerStall;
                break;
            }
            Err(e) => return Err((e, records)),
        };
        let new_losses = match problem.domain_losses(&inner.z) {
            Ok(l) => l,
            Err(e) => return Err((e, records)),
        };
        let new_gamma = gamma_of(inner.z.as_slice(), &new_losses).0;
        if new_gamma >= gamma {
            stop = StopReason::Converged;
            break;
        }
        let decrease = (gamma - new_gamma) / gamma;
        let mut rec = record(t, &inner.z, new_gamma, new_losses.clone());
        rec.majorization_gap = (inner.start_value - gamma).abs();
        rec.majorant_excess = new_gamma - inner.value;
        rec.inner_iters = inner.iters;
        records.push(rec);
        z = inner.z;
        gamma = new_gamma;
        losses = new_losses;
        if decrease < config.outer_tol {
            stop = StopReason::Converged;
            break;
        }
    }
    if gamma <= 1e-12 {
        stop = StopReason::Optimal;
    }
    Ok(Run { z, gamma, losses, records, stop })
}

/// Starting points: `config.z0`, then `config.restarts` Dirichlet(1) draws.
pub fn start_points(p: usize, config: &SolverConfig) -> Result<Vec<SimplexVector>> {
    let first = match &config.z0 {
        InitialPoint::Uniform => SimplexVector::uniform(p),
        InitialPoint::Given(z) if z.len() == p => z.clone(),
        InitialPoint::Given(z) => {
            return Err(Error::ShapeMismatch(format!("z0 has {} entries, expected {p}", z.len())))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = vec![first];
    out.extend((0..config.restarts).map(|_| SimplexVector::dirichlet(p, &mut rng)));
    Ok(out)
}

/// Values of γ closer than this count as equal when picking among starts.
const START_TIE_TOL: f64 = 1e-12;

/// Difference-of-convex iteration from every start; keeps the lowest γ,
/// preferring the earliest start among those within 1e-12 of each other.
pub fn dca_solve(problem: &DcProblem, config: &SolverConfig) -> std::result::Result<SolveOutcome, SolveFailure> {
    let empty = || SolveTrace { records: Vec::new(), stop: None, starts: Vec::new(), best_start: 0 };
    let fail = |error| SolveFailure { error, trace: empty() };
    config.validate().map_err(fail)?;
    let rebuilt;
    let problem = if config.eta != problem.eta() {
        rebuilt = problem.with_eta(config.eta).map_err(fail)?;
        &rebuilt
    } else {
        problem
    };
    let starts = start_points(problem.p(), config).map_err(fail)?;
    let runs: Vec<_> = starts.par_iter().map(|z0| run_from(problem, z0.clone(), config)).collect();

    let mut summaries = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, &Run)> = None;
    for (i, (z0, run)) in starts.iter().zip(&runs).enumerate() {
        match run {
            Ok(r) => {
                summaries.push(StartSummary {
                    z0: z0.as_slice().to_vec(),
                    gamma: r.gamma,
                    iters: r.records.len() - 1,
                    stop: Some(r.stop),
                });
                if best.is_none_or(|(_, b)| r.gamma < b.gamma - START_TIE_TOL) {
                    best = Some((i, r));
                }
            }
            Err((error, records)) => {
                return Err(SolveFailure {
                    error: error.clone(),
                    trace: SolveTrace { records: records.clone(), stop: None, starts: summaries, best_start: i },
                });
            }
        }
    }
    let (best_start, run) = best.expect("at least one start");
    let threshold = 1e-3 * problem.loss().m;
    Ok(SolveOutcome {
        z_star: run.z.clone(),
        gamma_star: run.gamma,
        losses: run.losses.clone(),
        certificate: optimality_certificate(run.gamma, threshold),
        trace: SolveTrace { records: run.records.clone(), stop: Some(run.stop), starts: summaries, best_start },
    })
}
