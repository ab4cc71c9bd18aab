use serde::{Deserialize, Serialize};

use crate::mc::RngStream;

/// Worst relative residual of one identity over a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub trials: usize,
    pub max_relative_residual: f64,
    pub worst_case_input: String,
    pub threshold: f64,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.max_relative_residual < self.threshold
            || (self.threshold == 0.0 && self.max_relative_residual == 0.0)
    }

    /// Combine reports of the same identity; keeps the larger residual.
    pub fn merge(mut self, other: &Self) -> Self {
        self.trials += other.trials;
        if other.max_relative_residual > self.max_relative_residual {
            self.max_relative_residual = other.max_relative_residual;
            self.worst_case_input = other.worst_case_input.clone();
        }
        self
    }
}

/// Running maximum with the input that produced it.
#[derive(Debug, Clone, Default)]
pub struct WorstCase {
    pub trials: usize,
    pub residual: f64,
    pub input: String,
}

impl WorstCase {
    pub fn record(&mut self, residual: f64, input: impl FnOnce() -> String) {
        self.trials += 1;
        // NaN must surface as a failure, never be skipped.
        let worse = residual.is_nan() || residual > self.residual || self.input.is_empty();
        if worse && !self.residual.is_nan() {
            self.residual = residual;
            self.input = input();
        }
    }

    pub fn into_report(self, name: impl Into<String>, threshold: f64) -> IdentityReport {
        IdentityReport {
            name: name.into(),
            trials: self.trials,
            max_relative_residual: self.residual,
            worst_case_input: self.input,
            threshold,
        }
    }
}

/// `count` seeded draws from `[lo, hi)`.
pub fn seeded_uniform(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, 0x616c_6762);
    (0..count).map(|_| rng.uniform_in(lo, hi)).collect()
}

pub(crate) fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.17e}")).collect();
    format!("({})", parts.join(","))
}
