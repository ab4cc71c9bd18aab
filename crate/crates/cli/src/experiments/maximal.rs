use homoeoid::maximal::{bump_family, l2_growth_scan, BoxRegion, L2GrowthParams, NetPolicy};

use super::{c_n, Metrics};
use crate::config::{dyadic_grid, RunConfig};
use crate::error::CliError;
use crate::output::{Outcome, Table};

pub const L2_MAX_SLOPE: f64 = 0.15;
pub const BUMP_FIELDS: usize = 4;

/// `|M^delta f|_2` for a bump-mixture family as `delta` shrinks.
pub fn l2_growth(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.dim();
    let family = bump_family(n, BUMP_FIELDS, cfg.seed)?;
    let p = L2GrowthParams {
        deltas: cfg.deltas.clone().unwrap_or_else(|| dyadic_grid(4, 8)),
        net: NetPolicy::Restricted,
        x_region: BoxRegion::cube(&vec![0.0; n], 0.25)?,
        x_samples: cfg.over_usize("x_samples").unwrap_or(48),
        samples: cfg.samples.unwrap_or(512),
        c_n: c_n(cfg),
        seed: cfg.seed,
    };
    let scan = l2_growth_scan(&family, &p)?;
    let mut table = Table::new(&["delta", "field", "norm", "std_error"]);
    for r in &scan.rows {
        table.push(vec![r.delta.into(), r.field_id.into(), r.norm_estimate.into(), r.std_error.into()]);
    }
    let slope = scan.fit.slope;
    let mut m = Metrics::default();
    m.f("slope", slope).f("max_abs_residual", scan.fit.max_abs_residual);
    Ok(m.finish(slope <= L2_MAX_SLOPE, table))
}
