use std::path::Path;
use std::process::{Command, Output};

use msadapt::scenarios::{builtin, BuiltinParams, SweepTable};
use msadapt_cli::json::to_json;
use msadapt_cli::report::{OracleReport, RunReport};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msadapt")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_report(dir: &Path) -> RunReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn lists_all_builtins() {
    let out = run(&["list-scenarios"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for name in ["lower-reg", "lower-xent", "gauss-reg", "gauss-xent"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn solve_writes_a_lossless_report_and_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = run(&["solve", "lower-reg", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let report: RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(to_json(&report), text);
    assert!(report.gamma_star <= 1e-6, "{}", report.gamma_star);
    assert!(report.timing.is_none());
    for w in report.trace.windows(2) {
        assert!(w[1].gamma <= w[0].gamma + 1e-12);
    }

    let csv = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iter,gamma,loss_1,loss_2"));
    assert_eq!(lines.count(), report.trace.len());
    let leftovers: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".partial"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn timing_is_recorded_only_on_request() {
    let out = run(&["solve", "lower-xent", "--timing"]);
    assert_eq!(code(&out), 0);
    let report: RunReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.timing.is_some_and(|t| t >= 0.0));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let dir = tmp.path().join(format!("r{i}"));
        let d = dir.to_str().unwrap();
        assert_eq!(code(&run(&["solve", "gauss-reg", "--seed", "7", "--restarts", "2", "--out", d])), 0);
        assert_eq!(code(&run(&["sweep", "gauss-reg", "--seed", "7", "--out", d])), 0);
        let files: Vec<Vec<u8>> =
            ["report.json", "trace.csv", "sweep.csv"].iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn uniform_sweep_on_the_regression_instance() {
    let out = run(&["sweep", "lower-reg", "--z", "uniform", "--eta", "0.01", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let table: SweepTable = serde_json::from_str(&stdout(&out)).unwrap();
    let worst = table.worst();
    assert!((worst.best_convex - 0.25).abs() <= 1e-9, "{worst:?}");
    assert!(worst.dw <= 0.01, "{worst:?}");
}

#[test]
fn sweep_grid_size_follows_the_resolution() {
    let out = run(&["sweep", "lower-xent", "--p", "3", "--z", "uniform", "--lambda-res", "0.2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("target,lambda,dw,unif,h_1,h_2,h_3,best_convex\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("grid_")).count(), 21);
}

#[test]
fn vertex_rows_match_the_solved_losses() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let d = dir.to_str().unwrap();
    assert_eq!(code(&run(&["solve", "lower-reg", "--out", d])), 0);
    let report = read_report(&dir);
    let z = dir.join("report.json");
    let out = run(&["sweep", "lower-reg", "--z", z.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let table: SweepTable = serde_json::from_str(&stdout(&out)).unwrap();
    for (k, name) in ["D_1", "D_2"].iter().enumerate() {
        let row = table.rows.iter().find(|r| r.target == *name).unwrap();
        assert!((row.dw - report.losses[k]).abs() <= 1e-12 * report.losses[k].max(1.0), "{name}");
        let last = report.trace.last().unwrap();
        assert!((row.dw - last.losses[k]).abs() <= 1e-12 * last.losses[k].max(1.0), "{name}");
    }
}

#[test]
fn invalid_inputs_exit_with_validation_code() {
    assert_eq!(code(&run(&["solve", "no-such-scenario"])), 2);
    assert_eq!(code(&run(&["solve", "lower-reg", "--z0", "0.2,0.3,0.5"])), 2);
    assert_eq!(code(&run(&["solve", "lower-reg", "--eta", "-1"])), 2);
    assert_eq!(code(&run(&["sweep", "lower-reg", "--z", "uniform", "--lambda-res", "0"])), 2);
}

#[test]
fn malformed_file_leaves_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value =
        serde_json::from_str(&builtin("lower-reg", &BuiltinParams::default()).unwrap().to_json()).unwrap();
    v["sources"][0]["probs"][0][0] = 0.7.into();
    let path = tmp.path().join("bad.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let dir = tmp.path().join("out");
    let out = run(&["solve", path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(!dir.exists());
}

#[test]
fn scenario_files_solve_like_builtins() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("lx.json");
    std::fs::write(&path, builtin("lower-xent", &BuiltinParams::default()).unwrap().to_json()).unwrap();
    let a = run(&["solve", path.to_str().unwrap()]);
    let b = run(&["solve", "lower-xent"]);
    assert_eq!(code(&a), 0);
    let ra: RunReport = serde_json::from_str(&stdout(&a)).unwrap();
    let rb: RunReport = serde_json::from_str(&stdout(&b)).unwrap();
    assert_eq!(ra.z_star, rb.z_star);
    assert_eq!(ra.gamma_star, rb.gamma_star);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let out = run(&["solve", "lower-reg", "--out", file.join("sub").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn oracle_passes_and_catches_a_faulty_gradient() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("o");
    let out = run(&["oracle", "lower-xent", "--p", "3", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: OracleReport =
        serde_json::from_str(&std::fs::read_to_string(dir.join("oracle.json")).unwrap()).unwrap();
    assert!(report.passes);
    assert!((report.convex_minmax.value - 3f64.ln()).abs() <= 1e-6);

    let out = run(&["oracle", "lower-reg", "--inject-gradient-fault"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gradient"));
}
