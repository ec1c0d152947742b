use msadapt::dc_solver::{check_balance, dca_solve, Certificate, InitialPoint, SolverConfig, StopReason};
use msadapt::domain_model::SimplexVector;
use msadapt::oracle::{grid_scan, GridSpec};
use msadapt::scenarios::{builtin, robustness_sweep, BuiltinParams, Combiner, Scenario, BUILTINS};

fn all_builtins() -> Vec<Scenario> {
    BUILTINS.iter().map(|(name, _)| builtin(name, &BuiltinParams::default()).unwrap()).collect()
}

fn certified_from_every_start(name: &str, max_iters: usize) {
    let s = builtin(name, &BuiltinParams { seed: 7, ..Default::default() }).unwrap();
    let config = SolverConfig { outer_max_iters: max_iters, restarts: 5, seed: 7, ..Default::default() };
    let out = dca_solve(&s.problem(config.eta).unwrap(), &config).unwrap();
    assert_eq!(out.trace.starts.len(), 6);
    for start in &out.trace.starts {
        assert!(start.gamma <= 1e-3, "{name} from {:?}: {}", start.z0, start.gamma);
        assert!(start.iters <= max_iters);
    }
    assert_eq!(out.certificate, Certificate::GlobalPlausible);
}

#[test]
fn gauss_reg_is_certified_within_50_iterations() {
    certified_from_every_start("gauss-reg", 50);
}

#[test]
fn gauss_xent_is_certified_within_100_iterations() {
    certified_from_every_start("gauss-xent", 100);
}

#[test]
fn trace_is_monotone_and_majorized() {
    for s in all_builtins() {
        let out = dca_solve(&s.problem(1e-3).unwrap(), &SolverConfig::default()).unwrap();
        for w in out.trace.records.windows(2) {
            assert!(w[1].gamma <= w[0].gamma + 1e-12, "{}", s.name);
        }
        for r in &out.trace.records {
            assert!(r.majorization_gap.abs() <= 1e-10, "{}: {}", s.name, r.majorization_gap);
            assert!(r.majorant_excess <= 1e-10, "{}: {}", s.name, r.majorant_excess);
        }
    }
}

#[test]
fn dca_matches_or_beats_the_grid() {
    for s in all_builtins() {
        let p = s.p();
        let prob = s.problem(1e-3).unwrap();
        let out = dca_solve(&prob, &SolverConfig::default()).unwrap();
        let spec = GridSpec::default_for(p);
        let scan = grid_scan(|z| Ok(prob.objective(z)?.0), spec).unwrap();
        assert!(out.gamma_star <= scan.value + 1e-9, "{}: {} vs {}", s.name, out.gamma_star, scan.value);
        let margin = scan.lipschitz * spec.resolution * (p as f64).sqrt();
        assert!((out.gamma_star - scan.value).abs() <= margin, "{}: margin {margin}", s.name);
    }
}

#[test]
fn solutions_are_balanced_over_every_mixture() {
    for s in all_builtins() {
        let config = SolverConfig::default();
        let prob = s.problem(config.eta).unwrap();
        let out = dca_solve(&prob, &config).unwrap();
        let report = check_balance(&prob, &out.z_star, config.eta_prime).unwrap();
        assert!(report.max_slack <= config.eta_prime + 1e-6, "{}: {:?}", s.name, report);

        let mixed: f64 = out.z_star.iter().zip(&out.losses).map(|(a, b)| a * b).sum();
        let res = msadapt::scenarios::default_lambda_resolution(s.p());
        let table = robustness_sweep(&s, &out.z_star, config.eta, res, Combiner::Joint).unwrap();
        for row in table.grid_rows() {
            assert!(row.dw <= mixed + config.eta_prime + 1e-6, "{} {}: {} vs {mixed}", s.name, row.target, row.dw);
        }
    }
}

#[test]
fn single_source_is_solved_immediately() {
    let s = msadapt::scenarios::random_discrete_scenario(msadapt::predictors::Model::Probability, 3, 1, 3, 2).unwrap();
    let out = dca_solve(&s.problem(1e-3).unwrap(), &SolverConfig::default()).unwrap();
    assert_eq!(out.z_star.as_slice(), &[1.0]);
    assert_eq!(out.gamma_star, 0.0);
    assert_eq!(out.trace.stop, Some(StopReason::Optimal));
}

#[test]
fn permuting_sources_permutes_the_solution() {
    let s = builtin("gauss-xent", &BuiltinParams::default()).unwrap();
    let perm = [2, 0, 1];
    let mut t = s.clone();
    t.sources = perm.iter().map(|&k| s.sources[k].clone()).collect();
    t.hypotheses = perm.iter().map(|&k| s.hypotheses[k].clone()).collect();
    let config = SolverConfig::default();
    let a = dca_solve(&s.problem(1e-3).unwrap(), &config).unwrap();
    let b = dca_solve(&t.problem(1e-3).unwrap(), &config).unwrap();
    let expected = a.z_star.permuted(&perm);
    assert!(expected.max_abs_diff(&b.z_star) <= 1e-3, "{:?} vs {:?}", expected, b.z_star);
    assert!((a.gamma_star - b.gamma_star).abs() <= 1e-9);
}

#[test]
fn given_start_and_restarts_are_reproducible() {
    let s = builtin("lower-xent", &BuiltinParams::default()).unwrap();
    let config = SolverConfig {
        z0: InitialPoint::Given(SimplexVector::new(vec![0.6, 0.3, 0.1]).unwrap()),
        restarts: 3,
        seed: 11,
        outer_max_iters: 20,
        ..Default::default()
    };
    let prob = s.problem(1e-3).unwrap();
    let a = dca_solve(&prob, &config).unwrap();
    let b = dca_solve(&prob, &config).unwrap();
    assert_eq!(a.z_star, b.z_star);
    assert_eq!(a.trace.records, b.trace.records);
}
