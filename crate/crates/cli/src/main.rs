use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use homoeoid_cli::{emit_report, parse_delta_grid, run_with_threads, threads_from_env, CliError, RunConfig};

/// Run one homoeoid experiment, or merge finished runs into a report.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Experiment name, e.g. `identities` or `knapp-exponent`.
    #[arg(long, required_unless_present = "emit_report")]
    experiment: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma list; `2^-k` is accepted.
    #[arg(long)]
    delta_grid: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// `key=value`, repeatable.
    #[arg(long = "override")]
    overrides: Vec<String>,
    /// Merge every summary.json under DIR and exit.
    #[arg(long, value_name = "DIR", conflicts_with = "experiment")]
    emit_report: Option<PathBuf>,
}

fn config(args: &Args) -> Result<RunConfig, CliError> {
    let name = args.experiment.as_deref().unwrap_or_default();
    let mut cfg = RunConfig::new(name.parse()?, &args.out).with_seed(args.seed);
    cfg.n = args.n;
    cfg.samples = args.samples;
    cfg.p = args.p;
    if let Some(g) = &args.delta_grid {
        cfg.deltas = Some(parse_delta_grid(g)?);
    }
    for o in &args.overrides {
        cfg.add_override(o)?;
    }
    Ok(cfg)
}

fn main_inner(args: &Args) -> Result<i32, CliError> {
    if let Some(dir) = &args.emit_report {
        let r = emit_report(dir)?;
        if r.skipped > 0 {
            eprintln!("warning: skipped {} unreadable summaries", r.skipped);
        }
        println!("{} runs merged into {}", r.runs.len(), dir.display());
        return Ok(0);
    }
    let cfg = config(args)?;
    let out = run_with_threads(&cfg, threads_from_env()?)?;
    let verdict = if out.outcome.pass { "PASS" } else { "FAIL" };
    println!("{} {verdict} -> {}", cfg.experiment, out.summary_path.display());
    Ok(out.exit_code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
