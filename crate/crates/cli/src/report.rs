use serde::{Deserialize, Serialize};

use msadapt::dc_solver::{BalanceReport, Certificate, IterRecord, SolverConfig, StartSummary, StopReason};
use msadapt::scenarios::{Combiner, DensityBackend, SweepTable};

/// Everything that determined a run, echoed into its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub solver: SolverConfig,
    pub p: Option<usize>,
    pub n: Option<usize>,
    pub density: DensityBackend,
    pub lambda_res: f64,
    pub combiner: Combiner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub provenance: String,
    pub seed: u64,
    pub config: ConfigEcho,
    pub z_star: Vec<f64>,
    pub gamma_star: f64,
    pub certificate: Certificate,
    pub losses: Vec<f64>,
    pub loss_bound: f64,
    /// `2ηM`, the slack the smoothing adds to the mixture guarantee.
    pub delta: f64,
    pub balance: BalanceReport,
    pub stop: Option<StopReason>,
    pub best_start: usize,
    pub starts: Vec<StartSummary>,
    pub trace: Vec<IterRecord>,
    pub sweep: SweepTable,
    /// Wall-clock seconds; only recorded with `--timing`.
    pub timing: Option<f64>,
}

/// `iter,gamma,loss_1..loss_p` with 9 significant digits.
pub fn trace_csv(trace: &[IterRecord], p: usize) -> String {
    let mut out = String::from("iter,gamma");
    for k in 1..=p {
        out.push_str(&format!(",loss_{k}"));
    }
    out.push('\n');
    for r in trace {
        out.push_str(&format!("{},{}", r.iter, msadapt::scenarios::fmt_csv(r.gamma)));
        for l in &r.losses {
            out.push(',');
            out.push_str(&msadapt::scenarios::fmt_csv(*l));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridComparison {
    pub resolution: f64,
    pub grid_gamma: f64,
    pub grid_z: Vec<f64>,
    pub dca_gamma: f64,
    pub dca_z: Vec<f64>,
    pub lipschitz: f64,
    pub margin: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexMinmax {
    pub resolution: f64,
    pub alpha: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub scenario: String,
    pub seed: u64,
    pub grid: GridComparison,
    /// Best worst-case loss of a fixed convex combination of the predictors.
    pub convex_minmax: ConvexMinmax,
    pub checks: Vec<msadapt::oracle::CheckReport>,
    pub passes: bool,
}
