//! One runner per experiment. Each returns an [`Outcome`] with a fixed CSV
//! schema; nothing here touches the filesystem.

mod algebra;
mod knapp;
mod maximal;
mod multiplicity;
mod volume;

use std::collections::BTreeMap;

use homoeoid::geometry::{default_c_n, AxisFrame, TangencyConfig};
use homoeoid::mc::RngStream;
use homoeoid::TangencyConfig64;
use serde_json::Value;

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;
use crate::output::{num, Outcome, Table};

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.experiment {
        Experiment::Identities => algebra::identities(cfg),
        Experiment::Nondeg => algebra::nondeg(cfg),
        Experiment::VolumeBound => volume::volume_bound(cfg),
        Experiment::Bands => volume::bands(cfg),
        Experiment::Clusters => volume::clusters(cfg),
        Experiment::Fibre => volume::fibre(cfg),
        Experiment::ExploreUnrefined => volume::explore_unrefined(cfg),
        Experiment::Multiplicity => multiplicity::multiplicity(cfg),
        Experiment::L2Growth => maximal::l2_growth(cfg),
        Experiment::KnappExponent => knapp::knapp_exponent(cfg),
        Experiment::Divergence => knapp::divergence(cfg),
        Experiment::Glpnorm => knapp::glpnorm(cfg),
    }
}

/// Metric map under construction.
#[derive(Default)]
pub(crate) struct Metrics(BTreeMap<String, Value>);

impl Metrics {
    pub fn f(&mut self, key: &str, v: f64) -> &mut Self {
        self.0.insert(key.to_owned(), num(v));
        self
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.0.insert(key.to_owned(), v.into());
        self
    }

    pub fn finish(self, pass: bool, table: Table) -> Outcome {
        let mut metrics = self.0;
        metrics.insert("pass".into(), Value::Bool(pass));
        Outcome { pass, metrics, table }
    }
}

pub(crate) fn c_n(cfg: &RunConfig) -> f64 {
    cfg.over("c_n").unwrap_or_else(|| default_c_n(cfg.dim()))
}

pub(crate) fn axis(cfg: &RunConfig) -> usize {
    cfg.over_usize("k").unwrap_or(0)
}

pub(crate) fn drift(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi / lo
}

/// Unit sphere against an ellipsoid touching it from inside the octant
/// opposite to the shift, at a point with `|w_k| >= 0.4`; `t ~ U[0.2, 1]`.
pub(crate) fn tangent_config(n: usize, k: usize, rng: &mut RngStream) -> Result<(TangencyConfig64, Vec<f64>), CliError> {
    loop {
        let mut w = rng.unit_vector(n);
        if w[k].abs() < 0.4 {
            continue;
        }
        for (j, v) in w.iter_mut().enumerate() {
            if j != k {
                *v = -v.abs();
            }
        }
        let t = rng.uniform_in(0.2, 1.0);
        return Ok((TangencyConfig::tangent_at(AxisFrame::new(n, k)?, t, &w)?, w));
    }
}
