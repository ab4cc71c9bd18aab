use homoeoid::multiplicity::{cordoba_check, default_count, generate_family, overlap_l2, overlap_l2_direct, CordobaParams};

use super::{axis, c_n, drift, Metrics};
use crate::config::{dyadic_grid, RunConfig};
use crate::error::CliError;
use crate::output::{Outcome, Table};

pub const MULTIPLICITY_MAX_DRIFT: f64 = 4.0;
pub const ORACLE_DELTA: f64 = 0.125;
pub const ORACLE_COUNTS: [usize; 3] = [3, 6, 8];
pub const ORACLE_PAIR_SAMPLES: usize = 200_000;
pub const ORACLE_DIRECT_SAMPLES: usize = 4_000_000;
pub const ORACLE_Z: f64 = 3.0;

/// `C(delta)` for `N = floor(1/delta)` families, and the pairwise sum against
/// direct sampling for small families.
pub fn multiplicity(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.dim();
    let c = c_n(cfg);
    let p = CordobaParams {
        n,
        k: axis(cfg),
        deltas: cfg.deltas.clone().unwrap_or_else(|| dyadic_grid(4, 8)),
        trials: cfg.over_usize("trials").unwrap_or(3),
        samples: cfg.samples.unwrap_or(4096),
        c_n: c,
        seed: cfg.seed,
    };
    let rep = cordoba_check(&p, default_count)?;
    let mut table = Table::new(&[
        "kind", "delta", "seed", "count", "value", "std_error", "reference", "reference_std_error", "c",
        "c_unrefined", "agrees",
    ]);
    for r in &rep.rows {
        table.push(vec![
            "cordoba".into(),
            r.delta.into(),
            r.trial_seed.into(),
            r.count.into(),
            r.norm.into(),
            r.std_error.into(),
            r.bound.into(),
            0.0.into(),
            r.c.into(),
            r.c_unrefined.into(),
            true.into(),
        ]);
    }
    let mut oracle_ok = true;
    let mut max_z = 0.0f64;
    for (i, &count) in ORACLE_COUNTS.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let fam = generate_family(n, 1.min(n - 1), ORACLE_DELTA, count, c, seed)?;
        let pair = overlap_l2(&fam, ORACLE_PAIR_SAMPLES, seed)?;
        let sq = pair.norm.value * pair.norm.value;
        let sq_se = 2.0 * pair.norm.value * pair.norm.std_error;
        let direct = overlap_l2_direct(&fam, ORACLE_DIRECT_SAMPLES, seed)?;
        let se = (sq_se * sq_se + direct.std_error * direct.std_error).sqrt();
        let z = (sq - direct.value).abs() / se;
        let ok = z <= ORACLE_Z;
        max_z = max_z.max(z);
        oracle_ok &= ok;
        table.push(vec![
            "oracle".into(),
            ORACLE_DELTA.into(),
            seed.into(),
            count.into(),
            sq.into(),
            sq_se.into(),
            direct.value.into(),
            direct.std_error.into(),
            f64::NAN.into(),
            f64::NAN.into(),
            ok.into(),
        ]);
    }
    let constant = rep.worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let d = drift(rep.worst.iter().map(|w| w.1));
    let mut m = Metrics::default();
    m.f("drift", d).f("constant", constant).f("oracle_max_z", max_z).set("oracle_ok", oracle_ok);
    for (delta, w) in &rep.worst {
        m.f(&format!("c_delta_{delta}"), *w);
    }
    let ceiling = cfg.over("C_n").map_or(true, |cap| constant <= cap);
    Ok(m.finish(d <= MULTIPLICITY_MAX_DRIFT && oracle_ok && ceiling, table))
}
