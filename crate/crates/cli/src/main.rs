//! Command-line front end: solve for mixture weights, sweep target
//! mixtures and run the numerical oracles on built-in or file scenarios.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use msadapt::dc_solver::{check_balance, dca_solve, InitialPoint, SolveOutcome, SolverConfig};
use msadapt::domain_model::SimplexVector;
use msadapt::oracle::{
    brute_force_minmax, convex_combination_max_loss, decomposition_check, grid_scan, gradient_check,
    gradient_check_with, uv_convexity_check, CheckReport, GridSpec,
};
use msadapt::scenarios::{
    builtin, default_lambda_resolution, robustness_sweep, BuiltinParams, Combiner, DensityBackend, Scenario,
    BUILTINS, DEFAULT_SEED,
};

use msadapt_cli::json;
use msadapt_cli::report::{trace_csv, ConfigEcho, ConvexMinmax, GridComparison, OracleReport, RunReport};

#[derive(Debug, Parser)]
#[command(name = "msadapt", version, about = "Distribution-weighted combination of per-domain predictors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the mixture weights z and write a report and trace.
    Solve(SolveArgs),
    /// Evaluate the combined predictor on named targets and a λ grid.
    Sweep(SweepArgs),
    /// Grid min-max, decomposition, convexity and gradient checks.
    Oracle(OracleArgs),
    /// List the built-in scenarios.
    ListScenarios,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Density {
    Exact,
    Kde,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CombinerArg {
    Joint,
    Normalized,
    Marginal,
}

impl From<CombinerArg> for Combiner {
    fn from(c: CombinerArg) -> Self {
        match c {
            CombinerArg::Joint => Combiner::Joint,
            CombinerArg::Normalized => Combiner::Normalized,
            CombinerArg::Marginal => Combiner::Marginal,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Built-in scenario name or path to a scenario file.
    scenario: String,
    /// Number of sources for lower-xent.
    #[arg(long)]
    p: Option<usize>,
    /// Draws per domain (gauss-reg) or per class and domain (gauss-xent).
    #[arg(long)]
    n: Option<usize>,
    /// Seed for scenario sampling and random restarts.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    density: Density,
    #[arg(long, default_value_t = 1e-3)]
    eta: f64,
    #[arg(long, default_value_t = 1e-4)]
    eta_prime: f64,
    /// Starting weights: `uniform` or comma-separated values.
    #[arg(long, default_value = "uniform")]
    z0: String,
    #[arg(long, default_value_t = 0)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 2000)]
    inner_iters: usize,
    /// Output directory; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time in reports (breaks byte-identical output).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    lambda_res: Option<f64>,
    #[arg(long, value_enum, default_value = "joint")]
    combiner: CombinerArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Where z comes from: `solve`, `uniform`, or a report/JSON-array file.
    #[arg(long, default_value = "solve")]
    z: String,
    #[arg(long)]
    lambda_res: Option<f64>,
    #[arg(long, value_enum, default_value = "joint")]
    combiner: CombinerArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    /// Grid resolution for the γ min-max; the per-dimension default otherwise.
    #[arg(long)]
    grid_res: Option<f64>,
    #[arg(long, hide = true)]
    inject_gradient_fault: bool,
}

/// Failure classes and their exit codes.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Oracle(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Oracle(_) => 4,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::ListScenarios => {
            for (name, about) in BUILTINS {
                println!("{name:<12}{about}");
            }
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn load_scenario(c: &Common) -> CliResult<Scenario> {
    let path = Path::new(&c.scenario);
    if path.exists() {
        return Scenario::load(path).map_err(invalid);
    }
    let backend = match c.density {
        Density::Exact => DensityBackend::Exact,
        Density::Kde => DensityBackend::Kde { bandwidth: None },
    };
    builtin(&c.scenario, &BuiltinParams { p: c.p, seed: c.seed, n: c.n, backend }).map_err(invalid)
}

fn parse_weights(text: &str) -> CliResult<SimplexVector> {
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| invalid(format!("cannot parse weights `{text}`: {e}")))?;
    SimplexVector::new(values).map_err(invalid)
}

fn solver_config(c: &Common, p: usize) -> CliResult<SolverConfig> {
    let z0 = match c.z0.as_str() {
        "uniform" => InitialPoint::Uniform,
        other => {
            let z = parse_weights(other)?;
            if z.len() != p {
                return Err(invalid(format!("--z0 has {} weights for {p} sources", z.len())));
            }
            InitialPoint::Given(z)
        }
    };
    let config = SolverConfig {
        eta: c.eta,
        eta_prime: c.eta_prime,
        outer_max_iters: c.max_iters,
        inner_max_iters: c.inner_iters,
        restarts: c.restarts,
        seed: c.seed,
        z0,
        ..SolverConfig::default()
    };
    config.validate().map_err(invalid)?;
    Ok(config)
}

fn solve(scenario: &Scenario, config: &SolverConfig) -> CliResult<SolveOutcome> {
    let problem = scenario.problem(config.eta).map_err(invalid)?;
    dca_solve(&problem, config).map_err(|f| CliError::Solver(format!("solver failed: {f}")))
}

fn lambda_res(arg: Option<f64>, p: usize) -> CliResult<f64> {
    let res = arg.unwrap_or_else(|| default_lambda_resolution(p));
    GridSpec::new(p, res).map_err(invalid)?;
    Ok(res)
}

/// Writes every file or none: contents are staged next to their targets
/// and renamed only after all writes succeed.
fn write_outputs(dir: &Path, files: &[(&str, String)]) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut staged = Vec::new();
    for (name, content) in files {
        let tmp = dir.join(format!(".{name}.partial"));
        if let Err(e) = std::fs::write(&tmp, content) {
            for t in &staged {
                let _ = std::fs::remove_file(t);
            }
            let _ = std::fs::remove_file(&tmp);
            return Err(io(e));
        }
        staged.push(tmp);
    }
    for (tmp, (name, _)) in staged.iter().zip(files) {
        std::fs::rename(tmp, dir.join(name)).map_err(io)?;
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> CliResult<()> {
    let start = Instant::now();
    let c = &args.common;
    let scenario = load_scenario(c)?;
    let p = scenario.p();
    let config = solver_config(c, p)?;
    let res = lambda_res(args.lambda_res, p)?;
    let combiner = Combiner::from(args.combiner);
    let out = solve(&scenario, &config)?;
    let problem = scenario.problem(config.eta).map_err(invalid)?;
    let balance = check_balance(&problem, &out.z_star, config.eta_prime).map_err(invalid)?;
    let sweep = robustness_sweep(&scenario, &out.z_star, config.eta, res, combiner).map_err(invalid)?;
    let report = RunReport {
        scenario: scenario.name.clone(),
        provenance: scenario.provenance.clone(),
        seed: c.seed,
        config: ConfigEcho {
            solver: config.clone(),
            p: c.p,
            n: c.n,
            density: density_echo(c.density),
            lambda_res: res,
            combiner,
        },
        z_star: out.z_star.as_slice().to_vec(),
        gamma_star: out.gamma_star,
        certificate: out.certificate,
        losses: out.losses.clone(),
        loss_bound: scenario.loss.m,
        delta: 2.0 * config.eta * scenario.loss.m,
        balance,
        stop: out.trace.stop,
        best_start: out.trace.best_start,
        starts: out.trace.starts.clone(),
        trace: out.trace.records.clone(),
        sweep,
        timing: c.timing.then(|| start.elapsed().as_secs_f64()),
    };
    let report_json = json::to_json(&report);
    let trace = trace_csv(&report.trace, p);
    match &c.out {
        Some(dir) => write_outputs(dir, &[("report.json", report_json), ("trace.csv", trace)]),
        None => {
            print!("{}", match args.format {
                Format::Json => report_json,
                Format::Csv => trace,
            });
            Ok(())
        }
    }
}

fn density_echo(d: Density) -> DensityBackend {
    match d {
        Density::Exact => DensityBackend::Exact,
        Density::Kde => DensityBackend::Kde { bandwidth: None },
    }
}

/// Reads `z` from a run report (its `z_star`) or a bare JSON array.
fn read_z(path: &Path) -> CliResult<SimplexVector> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(invalid)?;
    let array = value.get("z_star").unwrap_or(&value);
    let z: Vec<f64> = serde_json::from_value(array.clone())
        .map_err(|e| invalid(format!("{}: expected a weight array or a run report: {e}", path.display())))?;
    SimplexVector::new(z).map_err(invalid)
}

fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    let c = &args.common;
    let scenario = load_scenario(c)?;
    let p = scenario.p();
    let config = solver_config(c, p)?;
    let res = lambda_res(args.lambda_res, p)?;
    let z = match args.z.as_str() {
        "solve" => solve(&scenario, &config)?.z_star,
        "uniform" => SimplexVector::uniform(p),
        path => read_z(Path::new(path))?,
    };
    if z.len() != p {
        return Err(invalid(format!("z has {} weights for {p} sources", z.len())));
    }
    let table = robustness_sweep(&scenario, &z, config.eta, res, args.combiner.into()).map_err(invalid)?;
    let (name, text) = match args.format {
        Format::Csv => ("sweep.csv", table.to_csv()),
        Format::Json => ("sweep.json", json::to_json(&table)),
    };
    match &c.out {
        Some(dir) => write_outputs(dir, &[(name, text)]),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_oracle(args: OracleArgs) -> CliResult<()> {
    let c = &args.common;
    let scenario = load_scenario(c)?;
    let p = scenario.p();
    let config = solver_config(c, p)?;
    let spec = match args.grid_res {
        Some(r) => GridSpec::new(p, r).map_err(invalid)?,
        None => GridSpec::default_for(p),
    };
    let problem = scenario.problem(config.eta).map_err(invalid)?;

    let scan = grid_scan(|z| Ok(problem.objective(z)?.0), spec).map_err(invalid)?;
    let out = solve(&scenario, &config)?;
    let margin = scan.lipschitz * spec.resolution * (p as f64).sqrt();
    let grid = GridComparison {
        resolution: spec.resolution,
        grid_gamma: scan.value,
        grid_z: scan.z_best.as_slice().to_vec(),
        dca_gamma: out.gamma_star,
        dca_z: out.z_star.as_slice().to_vec(),
        lipschitz: scan.lipschitz,
        margin,
        passes: out.gamma_star <= scan.value + 1e-9 && (out.gamma_star - scan.value).abs() <= margin,
    };

    let convex_spec = GridSpec::containing_uniform(p);
    let (alpha, value) = brute_force_minmax(
        |a| convex_combination_max_loss(a, &scenario.sources, &scenario.hypotheses, scenario.loss.kind, &scenario.labels),
        convex_spec,
    )
    .map_err(invalid)?;

    let fault = args.inject_gradient_fault;
    let gradient = if fault {
        gradient_check_with(&problem, 50, c.seed, |k, z| {
            let mut g = problem.grad_v(k, z)?;
            g[0] += 0.01 * g[0].abs().max(1.0);
            Ok(g)
        })
    } else {
        gradient_check(&problem, 50, c.seed)
    };
    let checks: Vec<CheckReport> = vec![
        decomposition_check(&problem, 100, c.seed).map_err(invalid)?,
        uv_convexity_check(&problem, 200, c.seed).map_err(invalid)?,
        gradient.map_err(invalid)?,
    ];
    let passes = grid.passes && checks.iter().all(|r| r.passes);
    let failed: Vec<String> = checks
        .iter()
        .filter(|r| !r.passes)
        .map(|r| format!("{} (worst {:e}, tolerance {:e})", r.name, r.worst, r.tol))
        .chain((!grid.passes).then(|| {
            format!("grid (dca {:e} vs grid {:e}, margin {:e})", grid.dca_gamma, grid.grid_gamma, grid.margin)
        }))
        .collect();
    let report = OracleReport {
        scenario: scenario.name.clone(),
        seed: c.seed,
        grid,
        convex_minmax: ConvexMinmax { resolution: convex_spec.resolution, alpha: alpha.into_vec(), value },
        checks,
        passes,
    };
    let text = json::to_json(&report);
    match &c.out {
        Some(dir) => write_outputs(dir, &[("oracle.json", text)])?,
        None => print!("{text}"),
    }
    if passes {
        Ok(())
    } else {
        Err(CliError::Oracle(format!("check failed: {}", failed.join("; "))))
    }
}
