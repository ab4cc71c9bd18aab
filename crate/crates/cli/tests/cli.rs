use std::fs;
use std::path::Path;
use std::process::Command;

use homoeoid_cli::{emit_report, run, CliError, Experiment, Report, RunConfig, Summary};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homoeoid"))
}

fn exit_code(args: &[&str]) -> i32 {
    bin().args(args).output().expect("binary runs").status.code().expect("exit code")
}

fn quick_glpnorm(out: &Path, seed: u64) -> RunConfig {
    RunConfig::new(Experiment::Glpnorm, out).with_n(3).with_seed(seed)
}

#[test]
fn delta_above_one_half_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("vb");
    let code = exit_code(&["--experiment", "volume-bound", "--delta-grid", "0.7", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(!out.join("summary.json").exists());
}

#[test]
fn unknown_experiment_and_bad_flags_exit_two() {
    assert_eq!(exit_code(&["--experiment", "volume"]), 2);
    assert_eq!(exit_code(&["--experiment", "glpnorm", "--n", "12"]), 2);
    assert_eq!(exit_code(&["--experiment", "glpnorm", "--override", "nope=1"]), 2);
    assert_eq!(exit_code(&["--experiment", "glpnorm", "--override", "c_n"]), 2);
    assert_eq!(exit_code(&[]), 2);
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let out = blocker.join("sub");
    assert_eq!(exit_code(&["--experiment", "glpnorm", "--out", out.to_str().unwrap()]), 2);
}

#[test]
fn passing_and_failing_runs_exit_zero_and_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    assert_eq!(exit_code(&["--experiment", "glpnorm", "--out", out.to_str().unwrap()]), 0);
    // An absurd ceiling on the fitted constant is a violated threshold.
    let vb = dir.path().join("vb");
    let code = exit_code(&[
        "--experiment", "volume-bound", "--delta-grid", "2^-5,2^-6", "--samples", "2000",
        "--override", "trials=1", "--override", "C_n=1e-9", "--out", vb.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    let s: Summary = serde_json::from_slice(&fs::read(vb.join("summary.json")).unwrap()).unwrap();
    assert!(!s.pass);
}

#[test]
fn summary_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&quick_glpnorm(dir.path(), 3)).unwrap();
    assert_eq!(out.exit_code(), 0);
    let s: Summary = serde_json::from_slice(&fs::read(&out.summary_path).unwrap()).unwrap();
    assert_eq!(s.experiment, Experiment::Glpnorm);
    assert_eq!(s.seed, 3);
    assert_eq!(s.config.n, Some(3));
    assert!(s.pass && !s.exploratory);
    assert!(!s.timestamp.is_empty());
    assert_eq!(s.version, env!("CARGO_PKG_VERSION"));
    let csv = fs::read_to_string(&out.csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), s.results.columns.join(","));
    assert_eq!(lines.count(), s.results.rows.len());
    assert!(s.metrics.contains_key("norm_p2"));
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = |d: &str| {
        RunConfig::new(Experiment::Bands, dir.path().join(d))
            .with_seed(9)
            .with_deltas(vec![1.0 / 64.0])
            .with_samples(5000)
            .with_override("trials", 2.0)
    };
    let a = run(&cfg("a")).unwrap();
    let b = run(&cfg("b")).unwrap();
    assert_eq!(fs::read(&a.csv_path).unwrap(), fs::read(&b.csv_path).unwrap());
    let c = run(&cfg("c").with_seed(10)).unwrap();
    assert_ne!(fs::read(&a.csv_path).unwrap(), fs::read(&c.csv_path).unwrap());
}

#[test]
fn explore_unrefined_never_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(Experiment::ExploreUnrefined, dir.path())
        .with_samples(2000)
        .with_override("trials", 2.0);
    let out = run(&cfg).unwrap();
    assert_eq!(out.exit_code(), 0);
    let s: Summary = serde_json::from_slice(&fs::read(&out.summary_path).unwrap()).unwrap();
    assert!(s.exploratory && s.pass);
}

fn read_report(dir: &Path) -> Report {
    serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn report_of_one_run_is_that_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&quick_glpnorm(&dir.path().join("run"), 1)).unwrap();
    let rep = emit_report(dir.path()).unwrap();
    assert_eq!(rep.runs.len(), 1);
    assert_eq!(rep.skipped, 0);
    let s: Summary = serde_json::from_slice(&fs::read(&out.summary_path).unwrap()).unwrap();
    // NaN cells rule out `==` on the structs; compare serialised forms.
    let json = |v: &Summary| serde_json::to_value(v).unwrap();
    assert_eq!(json(&rep.runs[0]), json(&s));
    assert_eq!(json(&read_report(dir.path()).runs[0]), json(&s));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("experiment,seed,pass,metric,value\n"));
    assert!(csv.contains("glpnorm,1,true,norm_p2,"));
}

#[test]
fn report_orders_by_seed() {
    let dir = tempfile::tempdir().unwrap();
    // Directory names sort opposite to the seeds.
    run(&quick_glpnorm(&dir.path().join("a"), 8)).unwrap();
    run(&quick_glpnorm(&dir.path().join("b"), 2)).unwrap();
    let rep = emit_report(dir.path()).unwrap();
    let seeds: Vec<u64> = rep.runs.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, vec![2, 8]);
}

#[test]
fn corrupted_summary_is_skipped_and_counted() {
    let dir = tempfile::tempdir().unwrap();
    run(&quick_glpnorm(&dir.path().join("good"), 1)).unwrap();
    let bad = dir.path().join("bad");
    fs::create_dir_all(&bad).unwrap();
    fs::write(bad.join("summary.json"), b"{ not json").unwrap();
    let rep = emit_report(dir.path()).unwrap();
    assert_eq!(rep.runs.len(), 1);
    assert_eq!(rep.skipped, 1);
    assert!(rep.skipped_paths[0].ends_with("bad/summary.json"));
}

#[test]
fn empty_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = emit_report(dir.path()).unwrap_err();
    assert!(matches!(err, CliError::EmptyDirectory(_)));
    assert_eq!(err.exit_code(), 2);
    assert!(matches!(emit_report(&dir.path().join("missing")), Err(CliError::EmptyDirectory(_))));
    let code = exit_code(&["--emit-report", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn thread_cap_is_read_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let status = bin()
        .args(["--experiment", "glpnorm", "--out", out.to_str().unwrap()])
        .env("HOMOEOID_THREADS", "2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let status = bin()
        .args(["--experiment", "glpnorm", "--out", out.to_str().unwrap()])
        .env("HOMOEOID_THREADS", "zero")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
