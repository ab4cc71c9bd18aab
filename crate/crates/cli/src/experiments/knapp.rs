use homoeoid::knapp::{
    g_lp_norm, g_lp_norm_midpoint, knapp_exponent as scan, sample_tangency_set, shell_partial_sums,
    CounterexampleField, KnappParams, TangencySet,
};

use super::Metrics;
use crate::config::{dyadic_grid, RunConfig};
use crate::error::CliError;
use crate::output::{Outcome, Table};

pub const KNAPP_PS: [f64; 3] = [1.5, 2.0, 3.0];
pub const KNAPP_TOL_CRITICAL: f64 = 0.05;
pub const KNAPP_TOL: f64 = 0.1;
pub const RHO_OMEGA: f64 = 0.1;
pub const SLAB_CONSTANT: f64 = 4.0;
pub const SHELL_L_MAX: usize = 4096;
pub const SHELL_SAMPLES: usize = 256;
pub const SHELL_SLOPE_TOL: f64 = 0.05;
pub const G_PS: [f64; 2] = [2.0, 2.5];
pub const G_QUAD_POINTS: usize = 20;
pub const G_ORACLE_POINTS: usize = 1_000_000;
pub const G_ORACLE_TOL: f64 = 0.01;

fn knapp_tolerance(n: usize, p: f64) -> f64 {
    let critical = (n as f64 + 1.0) / (n as f64 - 1.0);
    if (p - critical).abs() < 1e-12 {
        KNAPP_TOL_CRITICAL
    } else {
        KNAPP_TOL
    }
}

/// Slope of `ln R(delta)` against `ln delta` for each `p`.
pub fn knapp_exponent(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.dim();
    let ps: Vec<f64> = cfg.p.map_or_else(|| KNAPP_PS.to_vec(), |p| vec![p]);
    let deltas = cfg.deltas.clone().unwrap_or_else(|| dyadic_grid(4, 10));
    let mut table = Table::new(&["p", "delta", "ratio", "std_error"]);
    let mut m = Metrics::default();
    let mut pass = true;
    for &p in &ps {
        let res = scan(&KnappParams {
            n,
            deltas: deltas.clone(),
            p,
            x_samples: cfg.over_usize("x_samples").unwrap_or(256),
            slab_samples: cfg.samples.unwrap_or(1024),
            rho_omega: cfg.over("rho_omega").unwrap_or(RHO_OMEGA),
            seed: cfg.seed,
        })?;
        for r in &res.rows {
            table.push(vec![p.into(), r.delta.into(), r.ratio.into(), r.std_error.into()]);
        }
        let tol = knapp_tolerance(n, p);
        let ok = (res.fit.slope - res.predicted_slope).abs() <= tol;
        pass &= ok;
        m.f(&format!("slope_p{p}"), res.fit.slope)
            .f(&format!("predicted_p{p}"), res.predicted_slope)
            .f(&format!("tolerance_p{p}"), tol);
        if ps.len() == 1 {
            m.f("slope", res.fit.slope).f("predicted_slope", res.predicted_slope);
        }
    }
    Ok(m.finish(pass, table))
}

/// Partial sums of the shell series at one tangency point. The gate is the
/// slope of `ln S_L` against `ln L` over dyadic `L`, expected `1/(n+1)`.
pub fn divergence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.dim();
    let set = TangencySet::new(n, cfg.over("rho_omega").unwrap_or(RHO_OMEGA))?;
    let point = sample_tangency_set(&set, 1, cfg.seed).remove(0);
    let field = CounterexampleField::new(n, cfg.over("C").unwrap_or(SLAB_CONSTANT))?;
    let l_max = cfg.over_usize("l_max").unwrap_or(SHELL_L_MAX);
    let series = shell_partial_sums(&field, &point, l_max, cfg.samples.unwrap_or(SHELL_SAMPLES), cfg.seed)?;
    let mut table = Table::new(&["ell", "term", "std_error", "hits", "low_confidence", "partial_sum"]);
    for (t, s) in series.terms.iter().zip(&series.partial_sums) {
        table.push(vec![
            t.ell.into(),
            t.value.into(),
            t.std_error.into(),
            t.hits.into(),
            t.low_confidence.into(),
            (*s).into(),
        ]);
    }
    let expected = 1.0 / (n as f64 + 1.0);
    let raw = series.raw_fit.as_ref().map_or(f64::NAN, |f| f.slope);
    let inc = series.increment_fit.as_ref().map_or(f64::NAN, |f| f.slope);
    let mut m = Metrics::default();
    m.f("slope", raw)
        .f("increment_slope", inc)
        .f("expected_slope", expected)
        .f("final_partial_sum", series.partial_sums.last().copied().unwrap_or(f64::NAN))
        .set("low_confidence_terms", series.terms.iter().filter(|t| t.low_confidence).count());
    Ok(m.finish((raw - expected).abs() <= SHELL_SLOPE_TOL, table))
}

/// Finiteness of `|g|_p` against the exponent count, and the panel
/// quadrature against a midpoint oracle where finite.
pub fn glpnorm(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.dim();
    let c = cfg.over("C").unwrap_or(SLAB_CONSTANT);
    let ps: Vec<f64> = cfg.p.map_or_else(|| G_PS.to_vec(), |p| vec![p]);
    let mut table = Table::new(&[
        "p", "value", "finite", "expected_finite", "oracle", "relative_error", "cutoff_slope", "extrapolation_error",
    ]);
    let mut m = Metrics::default();
    let mut pass = true;
    let nf = n as f64;
    for &p in &ps {
        let g = g_lp_norm(n, p, c, G_QUAD_POINTS)?;
        let a = nf + 1.0 - (nf - 1.0) * p;
        let b = nf * p / (nf + 1.0);
        let expected = a > 0.0 || (a == 0.0 && b > 1.0);
        let (oracle, rel) = if expected {
            let o = g_lp_norm_midpoint(n, p, c, G_ORACLE_POINTS).powf(1.0 / p);
            (o, (g.value - o).abs() / o)
        } else {
            (f64::INFINITY, f64::NAN)
        };
        pass &= g.finite == expected && (!expected || rel < G_ORACLE_TOL);
        table.push(vec![
            p.into(),
            g.value.into(),
            g.finite.into(),
            expected.into(),
            oracle.into(),
            rel.into(),
            g.cutoff_slope.into(),
            g.extrapolation_error.into(),
        ]);
        m.f(&format!("norm_p{p}"), g.value)
            .set(&format!("finite_p{p}"), g.finite)
            .f(&format!("oracle_relative_error_p{p}"), rel);
    }
    Ok(m.finish(pass, table))
}
