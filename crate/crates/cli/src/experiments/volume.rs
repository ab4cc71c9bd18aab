use std::f64::consts::PI;

use homoeoid::geometry::{AnnulusSpec, AxisFrame, Ellipsoid, Radii, TangencyConfig};
use homoeoid::mc::{derive_stream_id, RngStream};
use homoeoid::volume::{
    banded_intersection_scan, fibre_length_in_ball, intersection_volume_on, low_jacobian_cluster, trace_fibre,
    volume_bound as bound, volume_bound_scan, ClusterParams, VolumeBoundParams,
};
use homoeoid::Error;

use super::{axis, c_n, drift, tangent_config, Metrics};
use crate::config::{dyadic_grid, RunConfig};
use crate::error::CliError;
use crate::output::{Outcome, Table};

pub const VOLUME_MAX_DRIFT: f64 = 4.0;
pub const BAND_CONSTANT: f64 = 8.0 * PI;
pub const BAND_CONFIGS: usize = 8;
pub const BAND_Z: f64 = 3.0;
pub const CLUSTER_CONFIGS: usize = 100;
pub const CLUSTER_CAP: usize = 16;
pub const CLUSTER_MAX_DRIFT: f64 = 2.0;
pub const CLUSTER_LINKAGE: f64 = 8.0;
pub const FIBRE_CONFIGS: usize = 50;
pub const FIBRE_MAX_DRIFT: f64 = 4.0;
pub const FIBRE_CALIBRATION_TOL: f64 = 1e-6;
pub const FIBRE_STEP: f64 = 0.01;
pub const EXPLORE_CONFIGS: usize = 16;

const CONFIG_STREAM: u64 = 0x636f_6e66;

/// Refined intersection volumes over the `(delta, t)` grid divided by
/// `ln(1/delta) delta^2 / (delta + t)`.
pub fn volume_bound(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = VolumeBoundParams {
        n: cfg.dim(),
        k: axis(cfg),
        deltas: cfg.deltas.clone().unwrap_or_else(|| dyadic_grid(5, 9)),
        ts: dyadic_grid(0, 4),
        pair_trials: cfg.over_usize("trials").unwrap_or(50),
        samples: cfg.samples.unwrap_or(100_000),
        c_n: c_n(cfg),
        seed: cfg.seed,
    };
    let scan = volume_bound_scan(&p)?;
    let mut table = Table::new(&["delta", "t", "trial", "volume", "std_error", "bound", "ratio"]);
    for r in &scan.rows {
        table.push(vec![
            r.delta.into(),
            r.t.into(),
            r.trial.into(),
            r.measured.value.into(),
            r.measured.std_error.into(),
            r.bound.into(),
            r.ratio.into(),
        ]);
    }
    let constant = scan.max_ratio.iter().map(|x| x.1).fold(0.0, f64::max);
    let mut m = Metrics::default();
    m.f("drift", scan.drift).f("constant", constant);
    for (d, c) in &scan.max_ratio {
        m.f(&format!("constant_delta_{d}"), *c);
    }
    let ceiling = cfg.over("C_n").map_or(true, |c| constant <= c);
    Ok(m.finish(scan.drift <= VOLUME_MAX_DRIFT && ceiling, table))
}

/// Tangential / dyadic / transversal split of refined intersections at
/// tangent configurations.
pub fn bands(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.dim();
    let k = axis(cfg);
    let c = c_n(cfg);
    let big_c = cfg.over("C").unwrap_or(BAND_CONSTANT);
    let deltas = cfg.deltas.clone().unwrap_or_else(|| vec![1.0 / 64.0, 1.0 / 256.0]);
    let configs = cfg.over_usize("trials").unwrap_or(BAND_CONFIGS);
    let samples = cfg.samples.unwrap_or(400_000);
    let mut table = Table::new(&[
        "config", "delta", "t", "class", "rho", "volume", "std_error", "scale", "ratio", "passed",
    ]);
    let mut worst = 0.0f64;
    let mut partition_ok = true;
    let mut max_partition_z = 0.0f64;
    for i in 0..configs {
        let mut rng = RngStream::derived(cfg.seed, CONFIG_STREAM, i as u64);
        let (tc, _) = tangent_config(n, k, &mut rng)?;
        for (di, &delta) in deltas.iter().enumerate() {
            let seed = derive_stream_id(cfg.seed, (i * deltas.len() + di) as u64);
            let b = banded_intersection_scan(&tc, delta, c, samples, seed)?;
            let t = b.t;
            let scale = delta * delta / t;
            let mut push = |class: &str, rho: f64, e: homoeoid::mc::MCEstimate, gated: bool| {
                let ratio = e.value / scale;
                let ok = !gated || ratio <= big_c;
                if gated {
                    worst = worst.max(ratio);
                }
                table.push(vec![
                    i.into(),
                    delta.into(),
                    t.into(),
                    class.into(),
                    rho.into(),
                    e.value.into(),
                    e.std_error.into(),
                    scale.into(),
                    ratio.into(),
                    ok.into(),
                ]);
            };
            push("tangential", 2.0 * (t * delta).sqrt(), b.tang_volume, false);
            for (rho, e) in &b.dyadic_bands {
                push("band", *rho, *e, true);
            }
            push("transversal", t, b.trans_volume, true);
            let sum = b.class_sum();
            push("class_sum", f64::NAN, sum, false);
            push("total", f64::NAN, b.total, false);
            let se = (sum.std_error.powi(2) + b.total.std_error.powi(2)).sqrt();
            let z = if se > 0.0 { (sum.value - b.total.value).abs() / se } else { 0.0 };
            max_partition_z = max_partition_z.max(z);
            partition_ok &= sum.agrees_with(&b.total, BAND_Z);
        }
    }
    let mut m = Metrics::default();
    m.f("max_band_ratio", worst)
        .f("band_constant", big_c)
        .f("max_partition_z", max_partition_z)
        .set("partition_ok", partition_ok);
    Ok(m.finish(worst <= big_c && partition_ok, table))
}

/// Low-Jacobian clusters at `rho = t/32` and `t/64`.
pub fn clusters(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.dim();
    let k = axis(cfg);
    let c = c_n(cfg);
    let configs = cfg.over_usize("trials").unwrap_or(CLUSTER_CONFIGS);
    let samples = cfg.samples.unwrap_or(400_000);
    let linkage = cfg.over("linkage").unwrap_or(CLUSTER_LINKAGE);
    let fractions = [32.0, 64.0];
    let mut table = Table::new(&[
        "config", "t", "rho", "delta", "accepted", "clusters", "max_diameter", "diameter_constant",
    ]);
    let mut max_count = 0usize;
    let mut constants = [0.0f64; 2];
    for i in 0..configs {
        let mut rng = RngStream::derived(cfg.seed, CONFIG_STREAM, i as u64);
        let (tc, _) = tangent_config(n, k, &mut rng)?;
        let t = *tc.t();
        for (fi, frac) in fractions.iter().enumerate() {
            let rho = t / frac;
            let p = ClusterParams {
                rho,
                delta: rho / 4.0,
                c_n: c,
                linkage_const: linkage,
                samples,
                seed: derive_stream_id(cfg.seed, (2 * i + fi) as u64),
            };
            let r = low_jacobian_cluster(&tc, &p)?;
            let constant = r.max_diameter() / (rho / t);
            max_count = max_count.max(r.cluster_count);
            constants[fi] = constants[fi].max(constant);
            table.push(vec![
                i.into(),
                t.into(),
                rho.into(),
                p.delta.into(),
                r.sample_count.into(),
                r.cluster_count.into(),
                r.max_diameter().into(),
                constant.into(),
            ]);
        }
    }
    let d = drift(constants);
    let mut m = Metrics::default();
    m.set("max_clusters", max_count)
        .f("constant_rho_t_32", constants[0])
        .f("constant_rho_t_64", constants[1])
        .f("constant_drift", d);
    Ok(m.finish(max_count <= CLUSTER_CAP && d <= CLUSTER_MAX_DRIFT, table))
}

/// Length of two-quadric fibres in small balls, plus the circle calibration.
pub fn fibre(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let calib = trace_fibre(&[0.5, 0.0, 0.0], &Radii::unit(3), [0.0, 0.25], FIBRE_STEP)?;
    let calib_err = (calib.length() - 2.0 * PI).abs();
    let configs = cfg.over_usize("trials").unwrap_or(FIBRE_CONFIGS);
    let mut table = Table::new(&[
        "config", "x0", "x1", "x2", "r0", "r1", "r2", "u0", "u1", "xi0", "xi1", "xi2", "rho", "length_in_ball",
        "ratio",
    ]);
    let mut ratios = Vec::new();
    let mut proposals = 0u64;
    while ratios.len() < configs {
        let mut rng = RngStream::derived(cfg.seed, CONFIG_STREAM, proposals);
        proposals += 1;
        if proposals > 100 * configs as u64 + 100 {
            return Err(Error::InsufficientData(format!("only {} fibres traced", ratios.len())).into());
        }
        let x: Vec<f64> = (0..3).map(|_| rng.uniform_in(-0.6, 0.6)).collect();
        let r = Radii::new((0..3).map(|_| rng.uniform_in(0.6, 1.6)).collect())?;
        let u = [rng.uniform_in(-0.3, 0.3), rng.uniform_in(-0.3, 0.3)];
        let Ok(trace) = trace_fibre(&x, &r, u, FIBRE_STEP) else {
            continue;
        };
        if trace.components.is_empty() {
            continue;
        }
        let comp = &trace.components[rng.index(trace.components.len())];
        let xi = comp.points[rng.index(comp.points.len())];
        let rho = rng.uniform_in(0.02f64.ln(), 0.3f64.ln()).exp().min(comp.diameter() / 3.0);
        if !(rho > 0.0) {
            continue;
        }
        let Ok(len) = fibre_length_in_ball(&x, &r, u, &xi, rho) else {
            continue;
        };
        let ratio = len.in_ball / rho;
        let id = ratios.len();
        ratios.push(ratio);
        let rs = r.as_slice();
        table.push(vec![
            id.into(),
            x[0].into(),
            x[1].into(),
            x[2].into(),
            rs[0].into(),
            rs[1].into(),
            rs[2].into(),
            u[0].into(),
            u[1].into(),
            xi[0].into(),
            xi[1].into(),
            xi[2].into(),
            rho.into(),
            len.in_ball.into(),
            ratio.into(),
        ]);
    }
    let d = drift(ratios.iter().copied());
    let mut m = Metrics::default();
    m.f("calibration_length", calib.length())
        .f("calibration_error", calib_err)
        .f("max_ratio", ratios.iter().copied().fold(0.0, f64::max))
        .f("min_ratio", ratios.iter().copied().fold(f64::INFINITY, f64::min))
        .f("drift", d)
        .set("proposals", proposals);
    Ok(m.finish(d <= FIBRE_MAX_DRIFT && calib_err < FIBRE_CALIBRATION_TOL, table))
}

/// Plain against refined intersections at tangencies inside the exceptional
/// region `|w_k|^3 < 2 c_n`. Reported only.
pub fn explore_unrefined(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.dim();
    let k = axis(cfg);
    let c = c_n(cfg);
    let deltas = cfg.deltas.clone().unwrap_or_else(|| vec![1.0 / 64.0]);
    let configs = cfg.over_usize("trials").unwrap_or(EXPLORE_CONFIGS);
    let samples = cfg.samples.unwrap_or(100_000);
    let edge = (2.0 * c).cbrt();
    let mut table = Table::new(&[
        "config", "delta", "t", "omega_k", "plain", "plain_std_error", "refined", "refined_std_error", "bound",
        "plain_ratio", "refined_ratio",
    ]);
    let (mut worst_plain, mut worst_refined) = (0.0f64, 0.0f64);
    for i in 0..configs {
        let mut rng = RngStream::derived(cfg.seed, CONFIG_STREAM, i as u64);
        let mut w = rng.unit_vector(n);
        w[k] = rng.uniform_in(-edge, edge);
        let rest = (1.0 - w[k] * w[k]).sqrt();
        let others: f64 = (0..n).filter(|&j| j != k).map(|j| w[j] * w[j]).sum::<f64>().sqrt();
        for j in (0..n).filter(|&j| j != k) {
            w[j] = -(w[j] / others).abs() * rest;
        }
        let t = rng.uniform_in(0.2, 1.0);
        let tc = TangencyConfig::tangent_at(AxisFrame::new(n, k)?, t, &w)?;
        for (di, &delta) in deltas.iter().enumerate() {
            let a = AnnulusSpec::new(Ellipsoid::unit_sphere(n), delta)?;
            let b = AnnulusSpec::new(Ellipsoid::new(tc.centre(), tc.radii().clone())?, delta)?;
            let stream = derive_stream_id(CONFIG_STREAM, (i * deltas.len() + di) as u64);
            let plain = intersection_volume_on(&a, &b, samples, cfg.seed, stream)?;
            let refined = intersection_volume_on(
                &a.clone().refine(k, c)?,
                &b.clone().refine(k, c)?,
                samples,
                cfg.seed,
                stream,
            )?;
            let vb = bound(delta, t);
            worst_plain = worst_plain.max(plain.value / vb);
            worst_refined = worst_refined.max(refined.value / vb);
            table.push(vec![
                i.into(),
                delta.into(),
                t.into(),
                w[k].into(),
                plain.value.into(),
                plain.std_error.into(),
                refined.value.into(),
                refined.std_error.into(),
                vb.into(),
                (plain.value / vb).into(),
                (refined.value / vb).into(),
            ]);
        }
    }
    let mut m = Metrics::default();
    m.f("max_plain_ratio", worst_plain)
        .f("max_refined_ratio", worst_refined)
        .set("exploratory", true);
    Ok(m.finish(true, table))
}
