use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Identities,
    Nondeg,
    VolumeBound,
    Bands,
    Clusters,
    Fibre,
    Multiplicity,
    L2Growth,
    KnappExponent,
    Divergence,
    Glpnorm,
    ExploreUnrefined,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Self::Identities,
        Self::Nondeg,
        Self::VolumeBound,
        Self::Bands,
        Self::Clusters,
        Self::Fibre,
        Self::Multiplicity,
        Self::L2Growth,
        Self::KnappExponent,
        Self::Divergence,
        Self::Glpnorm,
        Self::ExploreUnrefined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Identities => "identities",
            Self::Nondeg => "nondeg",
            Self::VolumeBound => "volume-bound",
            Self::Bands => "bands",
            Self::Clusters => "clusters",
            Self::Fibre => "fibre",
            Self::Multiplicity => "multiplicity",
            Self::L2Growth => "l2-growth",
            Self::KnappExponent => "knapp-exponent",
            Self::Divergence => "divergence",
            Self::Glpnorm => "glpnorm",
            Self::ExploreUnrefined => "explore-unrefined",
        }
    }

    /// Exploratory runs report but never fail.
    pub fn is_exploratory(self) -> bool {
        self == Self::ExploreUnrefined
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{s}`")))
    }
}

/// Keys accepted by `--override`.
pub const OVERRIDE_KEYS: [&str; 10] = [
    "c_n", "c_bar", "C_n", "C", "rho_omega", "k", "trials", "x_samples", "l_max", "linkage",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// `None` lets the experiment pick its own dimension(s).
    pub n: Option<usize>,
    pub seed: u64,
    pub deltas: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub p: Option<f64>,
    pub out: PathBuf,
    pub overrides: BTreeMap<String, f64>,
}

impl RunConfig {
    pub fn new(experiment: Experiment, out: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            n: None,
            seed: 0,
            deltas: None,
            samples: None,
            p: None,
            out: out.into(),
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_deltas(mut self, deltas: Vec<f64>) -> Self {
        self.deltas = Some(deltas);
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = Some(samples);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_override(mut self, key: &str, value: f64) -> Self {
        self.overrides.insert(key.to_owned(), value);
        self
    }

    /// Parse `key=value`.
    pub fn add_override(&mut self, spec: &str) -> Result<(), CliError> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("override `{key}` has non-numeric value `{value}`")))?;
        self.overrides.insert(key.trim().to_owned(), value);
        Ok(())
    }

    pub fn over(&self, key: &str) -> Option<f64> {
        self.overrides.get(key).copied()
    }

    pub fn over_usize(&self, key: &str) -> Option<usize> {
        self.over(key).map(|v| v as usize)
    }

    pub fn dim(&self) -> usize {
        self.n.unwrap_or(3)
    }

    /// Checks that do not depend on the experiment's own parameter validation.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if let Some(n) = self.n {
            if !(2..=8).contains(&n) {
                return bad(format!("n = {n} outside 2..=8"));
            }
        }
        if let Some(ds) = &self.deltas {
            if ds.is_empty() {
                return bad("empty delta grid".into());
            }
            if let Some(d) = ds.iter().find(|d| !(**d > 0.0 && **d <= 0.5)) {
                return bad(format!("delta = {d} outside (0, 1/2]"));
            }
        }
        if self.samples == Some(0) {
            return bad("samples must be positive".into());
        }
        if let Some(p) = self.p {
            if !(p >= 1.0 && p.is_finite()) {
                return bad(format!("p = {p} outside [1, inf)"));
            }
        }
        for (key, value) in &self.overrides {
            if !OVERRIDE_KEYS.contains(&key.as_str()) {
                return bad(format!("unknown override `{key}`"));
            }
            if !value.is_finite() {
                return bad(format!("override `{key}` is not finite"));
            }
            let integral = matches!(key.as_str(), "k" | "trials" | "x_samples" | "l_max");
            if integral && (value.fract() != 0.0 || *value < 0.0) {
                return bad(format!("override `{key}` must be a non-negative integer"));
            }
            let positive = matches!(key.as_str(), "c_n" | "c_bar" | "C_n" | "C" | "rho_omega" | "linkage");
            if positive && !(*value > 0.0) {
                return bad(format!("override `{key}` must be positive"));
            }
        }
        if let Some(rho) = self.over("rho_omega") {
            if rho > 0.5 {
                return bad(format!("rho_omega = {rho} exceeds 1/2"));
            }
        }
        if let Some(k) = self.over_usize("k") {
            if k >= self.dim() {
                return bad(format!("k = {k} out of range for n = {}", self.dim()));
            }
        }
        Ok(())
    }
}

/// Parse a comma list such as `0.0625,0.03125` or `2^-4,2^-5`.
pub fn parse_delta_grid(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let v = match t.strip_prefix("2^") {
                Some(e) => e.parse::<i32>().map(|e| 2f64.powi(e)).ok(),
                None => t.parse::<f64>().ok(),
            };
            v.ok_or_else(|| CliError::Config(format!("bad delta `{t}`")))
        })
        .collect()
}

/// `2^-lo, ..., 2^-hi`.
pub fn dyadic_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(-e)).collect()
}
