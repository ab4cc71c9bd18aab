use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::CliError;
use crate::output::{metric_as_f64, Summary, SUMMARY_FILE, VERSION};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

/// Every readable run under a directory, ordered by experiment then seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub runs: Vec<Summary>,
    pub skipped: usize,
    pub skipped_paths: Vec<PathBuf>,
}

/// Merge every `summary.json` under `dir` into `report.json` and a long
/// `report.csv` (`experiment, seed, pass, metric, value`).
pub fn emit_report(dir: &Path) -> Result<Report, CliError> {
    if !dir.is_dir() {
        return Err(CliError::EmptyDirectory(dir.display().to_string()));
    }
    let mut found: Vec<(PathBuf, Summary)> = Vec::new();
    let mut skipped_paths = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| CliError::Io(e.to_string()))?;
        if !entry.file_type().is_file() || entry.file_name() != SUMMARY_FILE {
            continue;
        }
        let parsed = fs::read(entry.path())
            .ok()
            .and_then(|bytes| serde_json::from_slice::<Summary>(&bytes).ok());
        match parsed {
            Some(s) => found.push((entry.path().to_path_buf(), s)),
            None => skipped_paths.push(entry.path().to_path_buf()),
        }
    }
    if found.is_empty() && skipped_paths.is_empty() {
        return Err(CliError::EmptyDirectory(dir.display().to_string()));
    }
    found.sort_by(|(pa, a), (pb, b)| {
        (a.experiment, a.seed, pa).cmp(&(b.experiment, b.seed, pb))
    });
    let report = Report {
        version: VERSION.to_owned(),
        runs: found.into_iter().map(|(_, s)| s).collect(),
        skipped: skipped_paths.len(),
        skipped_paths,
    };
    fs::write(dir.join(REPORT_JSON), serde_json::to_vec_pretty(&report)?)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["experiment", "seed", "pass", "metric", "value"])?;
    for run in &report.runs {
        for (key, value) in &run.metrics {
            let Some(v) = metric_as_f64(value) else {
                continue;
            };
            w.write_record([
                run.experiment.name().to_owned(),
                run.seed.to_string(),
                run.pass.to_string(),
                key.clone(),
                crate::output::format_float(v),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join(REPORT_CSV), bytes)?;
    Ok(report)
}
